#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geopretext/backbones.hpp"
#include "geopretext/loss.hpp"
#include "geopretext/nn.hpp"
#include "geopretext/optimizer.hpp"
#include "geopretext/rng.hpp"

using namespace geopretext;

namespace {

Tensor<double> random_input(int n, int c, int h, int w, std::uint64_t seed) {
  Tensor<double> x(n, c, h, w);
  auto rng = make_rng(seed, 0x646174);
  std::normal_distribution<double> d(0.0, 1.0);
  for (auto& v : x.v) v = d(rng);
  return x;
}

std::vector<int> random_labels(int n, int K, std::uint64_t seed) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  auto rng = make_rng(seed, 0x6c6162);
  std::uniform_int_distribution<int> d(0, K - 1);
  for (auto& l : labels) l = d(rng);
  return labels;
}

double loss_of(Sequential<double>& net, const Tensor<double>& x,
               const std::vector<int>& labels, int K) {
  auto logits = net.forward(x, Mode::train);
  auto probs = softmax_logits(logits);
  return pretext_loss<double>(probs, labels, K);
}

/// Central finite differences vs backprop on `checks` random coordinates.
/// Returns the worst relative error.
double gradient_check(Sequential<double>& net, int K, std::uint64_t seed, int checks = 100) {
  ParamRegistry<double> reg;
  net.collect(reg);
  auto params = reg.items();
  init_params(params, seed);

  const Tensor<double> x = random_input(6, 3, 8, 8, seed + 1);
  const auto labels = random_labels(6, K, seed + 2);

  zero_grads(params);
  auto logits = net.forward(x, Mode::train);
  auto probs = softmax_logits(logits);
  (void)net.backward(cross_entropy_backward<double>(probs, labels));

  std::size_t total = 0;
  for (const auto& p : params) {
    if (!p.is_stat) total += p.value->size();
  }
  REQUIRE(total <= 10000);

  auto rng = make_rng(seed, 0x6664);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  const double h = 1e-5;
  double worst = 0.0;

  for (int t = 0; t < checks; ++t) {
    std::size_t flat = pick(rng);
    std::vector<double>* vec = nullptr;
    double* grad = nullptr;
    for (const auto& p : params) {
      if (p.is_stat) continue;
      if (flat < p.value->size()) {
        vec = p.value;
        grad = p.grad->data() + flat;
        break;
      }
      flat -= p.value->size();
    }
    REQUIRE(vec != nullptr);
    const double saved = (*vec)[flat];
    (*vec)[flat] = saved + h;
    const double up = loss_of(net, x, labels, K);
    (*vec)[flat] = saved - h;
    const double down = loss_of(net, x, labels, K);
    (*vec)[flat] = saved;
    const double fd = (up - down) / (2 * h);
    const double rel = std::abs(fd - *grad) / std::max({std::abs(fd), std::abs(*grad), 1e-8});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

TEST_CASE("conv with identity kernel passes input through") {
  Sequential<double> net;
  auto* conv = net.emplace<Conv2d<double>>("conv", 1, 1, 3, 1, 1, true);
  conv->weights()[4] = 1.0;  // center tap
  Tensor<double> x = random_input(2, 1, 5, 5, 3);
  auto y = net.forward(x, Mode::eval);
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    CHECK(y.v[i] == doctest::Approx(x.v[i]));
  }
}

TEST_CASE("gradients match finite differences: plain conv stack") {
  Sequential<double> net;
  net.emplace<Conv2d<double>>("conv1", 3, 4, 3, 1, 1, true);
  net.emplace<ReLU<double>>("relu1");
  net.emplace<MaxPool<double>>("pool1", 2, 2, 0);
  net.emplace<Conv2d<double>>("conv2", 4, 6, 3, 1, 1, true);
  net.emplace<ReLU<double>>("relu2");
  net.emplace<GlobalAvgPool<double>>("gap");
  net.emplace<Dense<double>>("fc", 6, 4, true);
  CHECK(gradient_check(net, 4, 21) < 1e-4);
}

TEST_CASE("gradients match finite differences: batchnorm and stride") {
  Sequential<double> net;
  net.emplace<Conv2d<double>>("conv1", 3, 5, 3, 2, 1, false);
  net.emplace<BatchNorm<double>>("bn1", 5);
  net.emplace<ReLU<double>>("relu1");
  net.emplace<AvgPool<double>>("pool", 2, 2, 0);
  net.emplace<GlobalAvgPool<double>>("gap");
  net.emplace<Dense<double>>("fc", 5, 3, true);
  CHECK(gradient_check(net, 3, 22) < 1e-4);
}

TEST_CASE("gradients match finite differences: residual with projection") {
  auto main = std::make_unique<Sequential<double>>();
  main->emplace<Conv2d<double>>("conv1", 4, 4, 3, 1, 1, false);
  main->emplace<BatchNorm<double>>("bn1", 4);
  main->emplace<ReLU<double>>("relu1");
  main->emplace<Conv2d<double>>("conv2", 4, 6, 1, 2, 0, false);
  main->emplace<BatchNorm<double>>("bn2", 6);
  auto shortcut = std::make_unique<Sequential<double>>();
  shortcut->emplace<Conv2d<double>>("conv", 4, 6, 1, 2, 0, false);
  shortcut->emplace<BatchNorm<double>>("bn", 6);

  Sequential<double> net;
  net.emplace<Conv2d<double>>("stem", 3, 4, 3, 1, 1, true);
  net.emplace<Residual<double>>("res", std::move(main), std::move(shortcut));
  net.emplace<ReLU<double>>("relu");
  net.emplace<GlobalAvgPool<double>>("gap");
  net.emplace<Dense<double>>("fc", 6, 3, true);
  CHECK(gradient_check(net, 3, 23) < 1e-4);
}

TEST_CASE("gradients match finite differences: identity-shortcut residual") {
  auto main = std::make_unique<Sequential<double>>();
  main->emplace<BatchNorm<double>>("bn", 4);
  main->emplace<ReLU<double>>("relu");
  main->emplace<Conv2d<double>>("conv", 4, 4, 3, 1, 1, true);
  Sequential<double> net;
  net.emplace<Conv2d<double>>("stem", 3, 4, 3, 1, 1, true);
  net.emplace<Residual<double>>("res", std::move(main), std::make_unique<Sequential<double>>());
  net.emplace<GlobalAvgPool<double>>("gap");
  net.emplace<Dense<double>>("fc", 4, 2, true);
  CHECK(gradient_check(net, 2, 24) < 1e-4);
}

TEST_CASE("gradients match finite differences: dense connectivity") {
  auto branch = std::make_unique<Sequential<double>>();
  branch->emplace<BatchNorm<double>>("bn", 5);
  branch->emplace<ReLU<double>>("relu");
  branch->emplace<Conv2d<double>>("conv", 5, 3, 3, 1, 1, false);
  Sequential<double> net;
  net.emplace<Conv2d<double>>("stem", 3, 5, 3, 1, 1, true);
  net.emplace<DenseUnit<double>>("dense", std::move(branch));
  net.emplace<GlobalAvgPool<double>>("gap");
  net.emplace<Dense<double>>("fc", 8, 3, true);
  CHECK(gradient_check(net, 3, 25) < 1e-4);
}

TEST_CASE("gradients match finite differences: probe-style dense head") {
  Sequential<double> net;
  net.emplace<GlobalAvgPool<double>>("gap");
  net.emplace<Dense<double>>("fc1", 3, 7, true);
  net.emplace<BatchNorm<double>>("bn1", 7);
  net.emplace<ReLU<double>>("relu1");
  net.emplace<Dense<double>>("fc2", 7, 5, true);
  CHECK(gradient_check(net, 5, 26) < 1e-4);
}

TEST_CASE("pretext loss analytics") {
  // uniform predictions: loss = ln K
  for (int K : {2, 4, 8, 10}) {
    MatRM<double> probs(3, K);
    probs.setConstant(1.0 / K);
    std::vector<int> labels = {0, K - 1, K / 2};
    CHECK(std::abs(pretext_loss<double>(probs, labels, K) - std::log(double(K))) < 1e-6);
  }

  // perfect one-hot predictions: loss vanishes
  MatRM<double> onehot = MatRM<double>::Zero(4, 4);
  for (int i = 0; i < 4; ++i) onehot(i, i) = 1.0;
  CHECK(pretext_loss<double>(onehot, {0, 1, 2, 3}, 4) <= 1e-11);

  // K=2, both copies right with p=0.8: loss = -ln 0.8
  MatRM<double> p8(2, 2);
  p8 << 0.8, 0.2, 0.2, 0.8;
  CHECK(pretext_loss<double>(p8, {0, 1}, 2) == doctest::Approx(-std::log(0.8)).epsilon(1e-9));

  // zero probability of the true label hits the floor instead of throwing
  MatRM<double> zero(1, 2);
  zero << 0.0, 1.0;
  const double capped = pretext_loss<double>(zero, {0}, 2);
  CHECK(capped == doctest::Approx(-std::log(1e-12)));
  CHECK(capped <= -std::log(kLogFloor) + 1e-9);

  CHECK_THROWS_AS((void)pretext_loss<double>(p8, {0, 2}, 2), std::invalid_argument);
}

TEST_CASE("pretext loss is permutation invariant and grouped form matches flat") {
  auto rng = make_rng(3, 0x70726d);
  const int sources = 5, K = 4;
  MatRM<double> probs(sources * K, K);
  std::vector<int> labels;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < probs.rows(); ++i) {
    double norm = 0;
    for (int j = 0; j < K; ++j) {
      probs(i, j) = u(rng);
      norm += probs(i, j);
    }
    probs.row(i) /= norm;
    labels.push_back(i % K);  // co-batched copies: labels cycle over K
  }
  const double flat = pretext_loss<double>(probs, labels, K);

  // grouped evaluation of the same batch: average over sources of
  // -(1/K) sum_y log p_y
  double grouped = 0.0;
  for (int s = 0; s < sources; ++s) {
    double per_source = 0.0;
    for (int y = 0; y < K; ++y) per_source -= std::log(probs(s * K + y, y));
    grouped += per_source / K;
  }
  grouped /= sources;
  CHECK(flat == doctest::Approx(grouped).epsilon(1e-12));

  // permuting samples within the batch leaves the loss unchanged
  std::vector<int> perm(static_cast<std::size_t>(probs.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  MatRM<double> probs2(probs.rows(), K);
  std::vector<int> labels2(labels.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    probs2.row(static_cast<Eigen::Index>(i)) = probs.row(perm[i]);
    labels2[i] = labels[static_cast<std::size_t>(perm[i])];
  }
  CHECK(pretext_loss<double>(probs2, labels2, K) == doctest::Approx(flat).epsilon(1e-12));

  // bounds
  CHECK(flat >= 0.0);
  CHECK(flat <= -std::log(kLogFloor));
}

TEST_CASE("lr schedule follows the drop rule exactly") {
  LrSchedule s;  // defaults: base 1e-3, drops {30, 60, 80}, factor 5, 100 epochs
  const std::pair<int, double> expected[] = {
      {0, 1e-3}, {29, 1e-3}, {30, 2e-4}, {59, 2e-4},
      {60, 4e-5}, {79, 4e-5}, {80, 8e-6}, {99, 8e-6},
  };
  for (const auto& [epoch, lr] : expected) {
    CHECK(lr_schedule(epoch, s) == lr);  // exact, not approximate
  }
  // monotone non-increasing across all epochs
  for (int e = 1; e < 100; ++e) {
    CHECK(lr_schedule(e, s) <= lr_schedule(e - 1, s));
  }
  CHECK_THROWS_AS((void)lr_schedule(100, s), std::invalid_argument);
  CHECK_THROWS_AS((void)lr_schedule(-1, s), std::invalid_argument);
}

TEST_CASE("optimizer steps: sgd quadratic, adam first-step scale") {
  // f(w) = w^2 from w=1 with lr 0.1 and no momentum history: w' = 0.8
  std::vector<double> w = {1.0}, g = {2.0};
  std::vector<ParamView<double>> params{{"w", &w, &g, false, true, 1}};
  auto sgd = optimizer_factory<double>(OptimizerKind::sgd, 0.1);
  sgd->step(params, 0.1);
  CHECK(w[0] == doctest::Approx(0.8));

  // Adam's bias-corrected first step has magnitude ~= lr for any grad scale
  for (double scale : {1e-3, 1.0, 1e3}) {
    std::vector<double> wa = {0.0}, ga = {scale};
    std::vector<ParamView<double>> pa{{"w", &wa, &ga, false, true, 1}};
    auto adam = optimizer_factory<double>(OptimizerKind::adam, 0.01);
    adam->step(pa, 0.01);
    CHECK(std::abs(wa[0] + 0.01) < 1e-5);  // moved by ~lr against the gradient
  }

  // RMSprop first step: lr * g / (sqrt((1-rho) g^2) + eps)
  std::vector<double> wr = {0.0}, gr = {4.0};
  std::vector<ParamView<double>> pr{{"w", &wr, &gr, false, true, 1}};
  auto rms = optimizer_factory<double>(OptimizerKind::rmsprop, 0.001);
  rms->step(pr, 0.001);
  CHECK(wr[0] == doctest::Approx(-0.001 * 4.0 / (std::sqrt(0.1 * 16.0) + 1e-8)));

  CHECK_THROWS_AS((void)optimizer_factory<double>(OptimizerKind::adam, 0.0),
                  std::invalid_argument);

  // frozen views are not touched
  std::vector<double> wf = {1.0}, gf = {5.0};
  std::vector<ParamView<double>> pf{{"w", &wf, &gf, false, false, 1}};
  sgd->step(pf, 0.1);
  CHECK(wf[0] == 1.0);
}

TEST_CASE("weight decay adds L2 pull") {
  std::vector<double> w = {2.0}, g = {0.0};
  std::vector<ParamView<double>> params{{"w", &w, &g, false, true, 1}};
  auto sgd = optimizer_factory<double>(OptimizerKind::sgd, 0.1);
  sgd->set_weight_decay(0.5);
  sgd->step(params, 0.1);
  CHECK(w[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
}
