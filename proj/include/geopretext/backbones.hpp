#pragma once

#include <memory>
#include <string>
#include <vector>

#include "geopretext/errors.hpp"
#include "geopretext/nn.hpp"

namespace geopretext {

enum class Arch { vgg16, nin, resnet50, resnet152v2, densenet201 };

Arch arch_from_string(const std::string& s);
std::string to_string(Arch a);
int max_blocks(Arch a);

/// Architecture identity plus truncation depth; input is fixed at 32x32x3.
/// (arch, num_blocks) uniquely determines every parameter shape.
struct BackboneSpec {
  Arch arch = Arch::vgg16;
  int num_blocks = 2;

  void validate() const {
    if (num_blocks < 1 || num_blocks > max_blocks(arch)) {
      throw ConfigError("BackboneSpec: " + to_string(arch) + " supports 1.." +
                        std::to_string(max_blocks(arch)) + " blocks, got " +
                        std::to_string(num_blocks));
    }
  }

  std::string describe() const {
    return to_string(arch) + "-" + std::to_string(num_blocks);
  }
  friend bool operator==(const BackboneSpec&, const BackboneSpec&) = default;
};

/// Backbone (truncated blocks + global average pooling) plus an optional
/// classification head. The frozen flag both stops gradient flow into the
/// backbone and pins its batch-norm statistics by forcing eval mode.
template <class T>
struct Network {
  BackboneSpec spec;
  Sequential<T> backbone;  // children: block1..blockB, gap
  Sequential<T> head;
  int feature_width = 0;
  bool backbone_trainable = true;

  Tensor<T> features(const Tensor<T>& x, Mode mode) {
    return backbone.forward(x, backbone_trainable ? mode : Mode::eval);
  }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    return head.forward(features(x, mode), mode);
  }
  Tensor<T> head_forward(const Tensor<T>& feats, Mode mode) {
    return head.forward(feats, mode);
  }
  /// Returns gradient w.r.t. the input of the earliest trainable stage.
  Tensor<T> backward(const Tensor<T>& dlogits) {
    Tensor<T> dfeat = head.backward(dlogits);
    if (!backbone_trainable) return dfeat;
    return backbone.backward(dfeat);
  }

  std::vector<ParamView<T>> collect_backbone() {
    ParamRegistry<T> reg;
    reg.push("backbone");
    backbone.collect(reg);
    reg.pop();
    for (auto& p : reg.items()) p.trainable = backbone_trainable;
    return std::move(reg.items());
  }
  std::vector<ParamView<T>> collect_head() {
    ParamRegistry<T> reg;
    reg.push("head");
    head.collect(reg);
    reg.pop();
    return std::move(reg.items());
  }
  std::vector<ParamView<T>> collect_all() {
    auto items = collect_backbone();
    auto h = collect_head();
    items.insert(items.end(), h.begin(), h.end());
    return items;
  }
};

/// Builds the architecture truncated after `spec.num_blocks` blocks, followed
/// by global average pooling. Weights are He-normal from (init_seed, name).
template <class T>
Network<T> build_backbone(const BackboneSpec& spec, std::uint64_t init_seed);

/// Single affine layer mapping pooled features to K logits.
template <class T>
void attach_pretext_head(Network<T>& net, int K, std::uint64_t init_seed);

/// affine(200) -> BN -> ReLU -> affine(200) -> BN -> ReLU -> affine(classes).
template <class T>
void attach_probe_head(Network<T>& net, int classes, std::uint64_t init_seed);

template <class T>
void set_backbone_trainable(Network<T>& net, bool trainable) {
  net.backbone_trainable = trainable;
}

struct ShapeRow {
  std::string stage;
  int channels = 0, height = 0, width = 0;
};

/// Output shape after every block of the truncated backbone (then the pooled
/// feature width), traced with a real forward pass.
std::vector<ShapeRow> shape_trace(const BackboneSpec& spec);
std::string shape_trace_table(const BackboneSpec& spec);

/// Pooled feature width for (arch, num_blocks) without building the network.
int feature_width_of(const BackboneSpec& spec);

// ---------------------------------------------------------------------------
// implementation
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
using SeqPtr = std::unique_ptr<Sequential<T>>;

template <class T>
SeqPtr<T> seq() {
  return std::make_unique<Sequential<T>>();
}

template <class T>
void add_conv_bn_relu(Sequential<T>& s, const std::string& tag, int in_c, int out_c,
                      int k, int stride, int pad) {
  s.template emplace<Conv2d<T>>("conv" + tag, in_c, out_c, k, stride, pad, false);
  s.template emplace<BatchNorm<T>>("bn" + tag, out_c);
  s.template emplace<ReLU<T>>("relu" + tag);
}

// --- VGG16: conv groups of 3x3 convs, each closed by a 2x2 max pool --------

template <class T>
void build_vgg16(Sequential<T>& net, int blocks, int& width) {
  static constexpr int kWidths[5] = {64, 128, 256, 512, 512};
  static constexpr int kConvs[5] = {2, 2, 3, 3, 3};
  int in_c = 3;
  for (int b = 0; b < blocks; ++b) {
    auto block = seq<T>();
    for (int j = 0; j < kConvs[b]; ++j) {
      block->template emplace<Conv2d<T>>("conv" + std::to_string(j + 1), in_c, kWidths[b],
                                         3, 1, 1, true);
      block->template emplace<ReLU<T>>("relu" + std::to_string(j + 1));
      in_c = kWidths[b];
    }
    block->template emplace<MaxPool<T>>("pool", 2, 2, 0);
    net.add("block" + std::to_string(b + 1), std::move(block));
  }
  width = in_c;
}

// --- Network-in-Network: three mlpconv stacks -------------------------------

template <class T>
void build_nin(Sequential<T>& net, int blocks, int& width) {
  struct Stack {
    int k, pad, c1, c2, c3;
    bool pool;
  };
  static const Stack kStacks[3] = {
      {5, 2, 192, 160, 96, true},
      {5, 2, 192, 192, 192, true},
      {3, 1, 192, 192, 192, false},
  };
  int in_c = 3;
  for (int b = 0; b < blocks; ++b) {
    const Stack& st = kStacks[b];
    auto block = seq<T>();
    block->template emplace<Conv2d<T>>("conv1", in_c, st.c1, st.k, 1, st.pad, true);
    block->template emplace<ReLU<T>>("relu1");
    block->template emplace<Conv2d<T>>("mlp1", st.c1, st.c2, 1, 1, 0, true);
    block->template emplace<ReLU<T>>("relu2");
    block->template emplace<Conv2d<T>>("mlp2", st.c2, st.c3, 1, 1, 0, true);
    block->template emplace<ReLU<T>>("relu3");
    if (st.pool) block->template emplace<MaxPool<T>>("pool", 3, 2, 1);
    in_c = st.c3;
    net.add("block" + std::to_string(b + 1), std::move(block));
  }
  width = in_c;
}

// --- ResNet50 (v1 bottlenecks, 3x3 stride-1 stem for 32x32 inputs) ----------

template <class T>
SeqPtr<T> bottleneck_v1(int in_c, int width, int stride, bool project) {
  auto main = seq<T>();
  add_conv_bn_relu(*main, "1", in_c, width, 1, 1, 0);
  add_conv_bn_relu(*main, "2", width, width, 3, stride, 1);
  main->template emplace<Conv2d<T>>("conv3", width, 4 * width, 1, 1, 0, false);
  main->template emplace<BatchNorm<T>>("bn3", 4 * width);
  auto shortcut = seq<T>();
  if (project) {
    shortcut->template emplace<Conv2d<T>>("conv", in_c, 4 * width, 1, stride, 0, false);
    shortcut->template emplace<BatchNorm<T>>("bn", 4 * width);
  }
  auto unit = seq<T>();
  unit->template emplace<Residual<T>>("residual", std::move(main), std::move(shortcut));
  unit->template emplace<ReLU<T>>("relu");
  return unit;
}

template <class T>
SeqPtr<T> resnet_v1_stage(int in_c, int width, int units, int stride) {
  auto stage = seq<T>();
  stage->add("unit1", bottleneck_v1<T>(in_c, width, stride, true));
  for (int u = 2; u <= units; ++u) {
    stage->add("unit" + std::to_string(u), bottleneck_v1<T>(4 * width, width, 1, false));
  }
  return stage;
}

template <class T>
void build_resnet50(Sequential<T>& net, int blocks, int& width) {
  auto stem = seq<T>();
  add_conv_bn_relu(*stem, "1", 3, 64, 3, 1, 1);
  net.add("block1", std::move(stem));
  width = 64;
  static constexpr int kUnits[4] = {3, 4, 6, 3};
  static constexpr int kWidth[4] = {64, 128, 256, 512};
  int in_c = 64;
  for (int s = 0; s < blocks - 1; ++s) {
    const int stride = s == 0 ? 1 : 2;
    net.add("block" + std::to_string(s + 2),
            resnet_v1_stage<T>(in_c, kWidth[s], kUnits[s], stride));
    in_c = 4 * kWidth[s];
    width = in_c;
  }
}

// --- ResNet152V2 (pre-activation bottlenecks) --------------------------------

template <class T>
SeqPtr<T> bottleneck_v2(int in_c, int width, int stride, bool project) {
  auto unit = seq<T>();
  if (project) {
    // stage entry: shared pre-activation feeds both branches
    auto preact = seq<T>();
    preact->template emplace<BatchNorm<T>>("bn", in_c);
    preact->template emplace<ReLU<T>>("relu");
    unit->add("preact", std::move(preact));
  }
  auto main = seq<T>();
  if (!project) {
    main->template emplace<BatchNorm<T>>("bn0", in_c);
    main->template emplace<ReLU<T>>("relu0");
  }
  main->template emplace<Conv2d<T>>("conv1", in_c, width, 1, 1, 0, false);
  main->template emplace<BatchNorm<T>>("bn1", width);
  main->template emplace<ReLU<T>>("relu1");
  main->template emplace<Conv2d<T>>("conv2", width, width, 3, stride, 1, false);
  main->template emplace<BatchNorm<T>>("bn2", width);
  main->template emplace<ReLU<T>>("relu2");
  main->template emplace<Conv2d<T>>("conv3", width, 4 * width, 1, 1, 0, true);
  auto shortcut = seq<T>();
  if (project) {
    shortcut->template emplace<Conv2d<T>>("conv", in_c, 4 * width, 1, stride, 0, true);
  }
  unit->template emplace<Residual<T>>("residual", std::move(main), std::move(shortcut));
  return unit;
}

template <class T>
SeqPtr<T> resnet_v2_stage(int in_c, int width, int units, int stride) {
  auto stage = seq<T>();
  stage->add("unit1", bottleneck_v2<T>(in_c, width, stride, true));
  for (int u = 2; u <= units; ++u) {
    stage->add("unit" + std::to_string(u), bottleneck_v2<T>(4 * width, width, 1, false));
  }
  return stage;
}

template <class T>
void build_resnet152v2(Sequential<T>& net, int blocks, int& width) {
  auto stem = seq<T>();
  stem->template emplace<Conv2d<T>>("conv1", 3, 64, 3, 1, 1, true);
  net.add("block1", std::move(stem));
  width = 64;
  static constexpr int kUnits[4] = {3, 8, 36, 3};
  static constexpr int kWidth[4] = {64, 128, 256, 512};
  int in_c = 64;
  for (int s = 0; s < blocks - 1; ++s) {
    const int stride = s == 0 ? 1 : 2;
    auto stage = resnet_v2_stage<T>(in_c, kWidth[s], kUnits[s], stride);
    in_c = 4 * kWidth[s];
    // the final stage of the full-depth network carries the closing
    // post-activation; truncated models end on raw residual sums
    if (s == blocks - 2 && blocks == 5) {
      auto post = seq<T>();
      post->template emplace<BatchNorm<T>>("bn", in_c);
      post->template emplace<ReLU<T>>("relu");
      stage->add("post", std::move(post));
    }
    net.add("block" + std::to_string(s + 2), std::move(stage));
    width = in_c;
  }
}

// --- DenseNet201 (growth 32, half-compression transitions) ------------------

template <class T>
SeqPtr<T> dense_block(int in_c, int layers, int growth, int& out_c) {
  auto block = seq<T>();
  int c = in_c;
  for (int l = 1; l <= layers; ++l) {
    auto branch = seq<T>();
    branch->template emplace<BatchNorm<T>>("bn1", c);
    branch->template emplace<ReLU<T>>("relu1");
    branch->template emplace<Conv2d<T>>("conv1", c, 4 * growth, 1, 1, 0, false);
    branch->template emplace<BatchNorm<T>>("bn2", 4 * growth);
    branch->template emplace<ReLU<T>>("relu2");
    branch->template emplace<Conv2d<T>>("conv2", 4 * growth, growth, 3, 1, 1, false);
    auto unit = seq<T>();
    unit->template emplace<DenseUnit<T>>("concat", std::move(branch));
    block->add("layer" + std::to_string(l), std::move(unit));
    c += growth;
  }
  out_c = c;
  return block;
}

template <class T>
void add_transition(Sequential<T>& block, int in_c, int& out_c) {
  auto t = seq<T>();
  t->template emplace<BatchNorm<T>>("bn", in_c);
  t->template emplace<ReLU<T>>("relu");
  t->template emplace<Conv2d<T>>("conv", in_c, in_c / 2, 1, 1, 0, false);
  t->template emplace<AvgPool<T>>("pool", 2, 2, 0);
  block.add("transition", std::move(t));
  out_c = in_c / 2;
}

template <class T>
void build_densenet201(Sequential<T>& net, int blocks, int& width) {
  auto stem = seq<T>();
  stem->template emplace<Conv2d<T>>("conv1", 3, 64, 3, 1, 1, false);
  net.add("block1", std::move(stem));
  width = 64;
  static constexpr int kLayers[4] = {6, 12, 48, 32};
  constexpr int growth = 32;
  int c = 64;
  for (int s = 0; s < blocks - 1; ++s) {
    auto block = seq<T>();
    int after = 0;
    block->add("dense", dense_block<T>(c, kLayers[s], growth, after));
    if (s < 3) {
      add_transition(*block, after, after);
    } else {
      auto post = seq<T>();
      post->template emplace<BatchNorm<T>>("bn", after);
      post->template emplace<ReLU<T>>("relu");
      block->add("post", std::move(post));
    }
    net.add("block" + std::to_string(s + 2), std::move(block));
    c = after;
    width = c;
  }
}

}  // namespace detail

template <class T>
Network<T> build_backbone(const BackboneSpec& spec, std::uint64_t init_seed) {
  spec.validate();
  Network<T> net;
  net.spec = spec;
  int width = 0;
  switch (spec.arch) {
    case Arch::vgg16: detail::build_vgg16<T>(net.backbone, spec.num_blocks, width); break;
    case Arch::nin: detail::build_nin<T>(net.backbone, spec.num_blocks, width); break;
    case Arch::resnet50:
      detail::build_resnet50<T>(net.backbone, spec.num_blocks, width);
      break;
    case Arch::resnet152v2:
      detail::build_resnet152v2<T>(net.backbone, spec.num_blocks, width);
      break;
    case Arch::densenet201:
      detail::build_densenet201<T>(net.backbone, spec.num_blocks, width);
      break;
  }
  net.backbone.template emplace<GlobalAvgPool<T>>("gap");
  net.feature_width = width;
  auto params = net.collect_backbone();
  init_params(params, init_seed);
  return net;
}

template <class T>
void attach_pretext_head(Network<T>& net, int K, std::uint64_t init_seed) {
  if (K < 2) throw std::invalid_argument("attach_pretext_head: K must be >= 2");
  net.head = Sequential<T>();
  net.head.template emplace<Dense<T>>("fc", net.feature_width, K, true);
  auto params = net.collect_head();
  init_params(params, init_seed);
}

template <class T>
void attach_probe_head(Network<T>& net, int classes, std::uint64_t init_seed) {
  if (classes < 2) throw std::invalid_argument("attach_probe_head: classes must be >= 2");
  net.head = Sequential<T>();
  net.head.template emplace<Dense<T>>("fc1", net.feature_width, 200, true);
  net.head.template emplace<BatchNorm<T>>("bn1", 200);
  net.head.template emplace<ReLU<T>>("relu1");
  net.head.template emplace<Dense<T>>("fc2", 200, 200, true);
  net.head.template emplace<BatchNorm<T>>("bn2", 200);
  net.head.template emplace<ReLU<T>>("relu2");
  net.head.template emplace<Dense<T>>("fc3", 200, classes, true);
  auto params = net.collect_head();
  init_params(params, init_seed);
}

}  // namespace geopretext
