#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "geopretext/nn.hpp"

namespace geopretext {

enum class OptimizerKind { sgd, rmsprop, adam };

OptimizerKind optimizer_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

/// Piecewise-constant schedule: the base rate divided by factor^k after the
/// k-th listed drop epoch. "Dropped after thirty epochs" means the new rate
/// takes effect at 0-based epoch index 30.
struct LrSchedule {
  double base_lr = 1e-3;
  std::vector<int> drop_epochs = {30, 60, 80};
  double drop_factor = 5.0;
  int total_epochs = 100;
};

inline double lr_schedule(int epoch, const LrSchedule& s) {
  if (epoch < 0 || epoch >= s.total_epochs) {
    throw std::invalid_argument("lr_schedule: epoch " + std::to_string(epoch) +
                                " outside [0, " + std::to_string(s.total_epochs) + ")");
  }
  int stage = 0;
  for (int d : s.drop_epochs) {
    if (epoch >= d) ++stage;
  }
  // single division by the integer power; repeated division accumulates
  // rounding (0.001/5/5/5 != 8e-6)
  double denom = 1.0;
  for (int i = 0; i < stage; ++i) denom *= s.drop_factor;
  return s.base_lr / denom;
}

/// First-order optimizer over a set of collected parameter views. State is
/// keyed by parameter name so it survives checkpoint round trips.
template <class T>
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  void step(std::vector<ParamView<T>>& params, double lr) {
    for (auto& p : params) {
      if (p.is_stat || !p.trainable || !p.grad) continue;
      if (weight_decay_ != 0.0) {
        for (std::size_t i = 0; i < p.value->size(); ++i) {
          (*p.grad)[i] += static_cast<T>(weight_decay_) * (*p.value)[i];
        }
      }
      update(p, lr);
    }
    ++step_count_;
  }

  /// Step at the construction-time base rate.
  void step(std::vector<ParamView<T>>& params) { step(params, base_lr_); }

  double base_lr() const { return base_lr_; }
  void set_base_lr(double lr) { base_lr_ = lr; }
  void set_weight_decay(double wd) { weight_decay_ = wd; }
  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t t) { step_count_ = t; }

  /// Per-parameter state buffers ("momentum", "sq_avg", ...) for resume.
  std::map<std::string, std::vector<T>>& state() { return state_; }
  const std::map<std::string, std::vector<T>>& state() const { return state_; }

  virtual OptimizerKind kind() const = 0;

 protected:
  virtual void update(ParamView<T>& p, double lr) = 0;

  std::vector<T>& slot(const ParamView<T>& p, const std::string& tag) {
    auto& buf = state_[p.name + "#" + tag];
    if (buf.size() != p.value->size()) buf.assign(p.value->size(), T(0));
    return buf;
  }

  std::map<std::string, std::vector<T>> state_;
  std::int64_t step_count_ = 0;
  double weight_decay_ = 0.0;
  double base_lr_ = 1e-3;
};

template <class T>
class Sgd : public Optimizer<T> {
 public:
  explicit Sgd(double momentum = 0.9) : momentum_(momentum) {}
  OptimizerKind kind() const override { return OptimizerKind::sgd; }

 protected:
  void update(ParamView<T>& p, double lr) override {
    auto& vel = this->slot(p, "momentum");
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      vel[i] = static_cast<T>(momentum_) * vel[i] + (*p.grad)[i];
      (*p.value)[i] -= static_cast<T>(lr) * vel[i];
    }
  }

 private:
  double momentum_;
};

template <class T>
class RmsProp : public Optimizer<T> {
 public:
  explicit RmsProp(double rho = 0.9, double eps = 1e-8) : rho_(rho), eps_(eps) {}
  OptimizerKind kind() const override { return OptimizerKind::rmsprop; }

 protected:
  void update(ParamView<T>& p, double lr) override {
    auto& sq = this->slot(p, "sq_avg");
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      const double g = static_cast<double>((*p.grad)[i]);
      const double s = rho_ * static_cast<double>(sq[i]) + (1.0 - rho_) * g * g;
      sq[i] = static_cast<T>(s);
      (*p.value)[i] -= static_cast<T>(lr * g / (std::sqrt(s) + eps_));
    }
  }

 private:
  double rho_, eps_;
};

template <class T>
class Adam : public Optimizer<T> {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}
  OptimizerKind kind() const override { return OptimizerKind::adam; }

 protected:
  void update(ParamView<T>& p, double lr) override {
    auto& m = this->slot(p, "m");
    auto& v = this->slot(p, "v");
    const double t = static_cast<double>(this->step_count_ + 1);
    const double bc1 = 1.0 - std::pow(beta1_, t);
    const double bc2 = 1.0 - std::pow(beta2_, t);
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      const double g = static_cast<double>((*p.grad)[i]);
      const double mi = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * g;
      const double vi = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      (*p.value)[i] -= static_cast<T>(lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps_));
    }
  }

 private:
  double beta1_, beta2_, eps_;
};

/// SGD carries momentum 0.9, RMSprop rho 0.9, Adam the default moment
/// coefficients. The learning-rate schedule is applied by the caller via
/// step(lr).
template <class T>
std::unique_ptr<Optimizer<T>> optimizer_factory(OptimizerKind kind, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("optimizer_factory: lr must be positive");
  std::unique_ptr<Optimizer<T>> opt;
  switch (kind) {
    case OptimizerKind::sgd: opt = std::make_unique<Sgd<T>>(0.9); break;
    case OptimizerKind::rmsprop: opt = std::make_unique<RmsProp<T>>(0.9); break;
    case OptimizerKind::adam: opt = std::make_unique<Adam<T>>(); break;
    default: throw std::invalid_argument("optimizer_factory: unknown optimizer kind");
  }
  opt->set_base_lr(lr);
  return opt;
}

inline OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "rmsprop") return OptimizerKind::rmsprop;
  if (s == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

inline std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

}  // namespace geopretext
