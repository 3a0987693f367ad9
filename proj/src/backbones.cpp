#include "geopretext/backbones.hpp"

#include <sstream>

namespace geopretext {

Arch arch_from_string(const std::string& s) {
  if (s == "vgg16") return Arch::vgg16;
  if (s == "nin") return Arch::nin;
  if (s == "resnet50") return Arch::resnet50;
  if (s == "resnet152v2") return Arch::resnet152v2;
  if (s == "densenet201") return Arch::densenet201;
  throw ConfigError("unknown architecture '" + s + "'");
}

std::string to_string(Arch a) {
  switch (a) {
    case Arch::vgg16: return "vgg16";
    case Arch::nin: return "nin";
    case Arch::resnet50: return "resnet50";
    case Arch::resnet152v2: return "resnet152v2";
    case Arch::densenet201: return "densenet201";
  }
  return "?";
}

int max_blocks(Arch a) {
  return a == Arch::nin ? 3 : 5;
}

std::vector<ShapeRow> shape_trace(const BackboneSpec& spec) {
  Network<float> net = build_backbone<float>(spec, 1);
  std::vector<ShapeRow> rows;
  Tensor<float> cur(1, 3, 32, 32);
  for (std::size_t i = 0; i < net.backbone.child_count(); ++i) {
    cur = net.backbone.child(i)->forward(cur, Mode::eval);
    rows.push_back({net.backbone.child_name(i), cur.c, cur.h, cur.w});
  }
  return rows;
}

std::string shape_trace_table(const BackboneSpec& spec) {
  std::ostringstream os;
  os << "| stage | channels | height | width |\n|---|---|---|---|\n";
  for (const auto& row : shape_trace(spec)) {
    os << "| " << spec.describe() << "/" << row.stage << " | " << row.channels << " | "
       << row.height << " | " << row.width << " |\n";
  }
  return os.str();
}

int feature_width_of(const BackboneSpec& spec) {
  spec.validate();
  static constexpr int kVgg[5] = {64, 128, 256, 512, 512};
  static constexpr int kNin[3] = {96, 192, 192};
  static constexpr int kResnet[5] = {64, 256, 512, 1024, 2048};
  static constexpr int kDensenet[5] = {64, 128, 256, 896, 1920};
  const int b = spec.num_blocks - 1;
  switch (spec.arch) {
    case Arch::vgg16: return kVgg[b];
    case Arch::nin: return kNin[b];
    case Arch::resnet50: return kResnet[b];
    case Arch::resnet152v2: return kResnet[b];
    case Arch::densenet201: return kDensenet[b];
  }
  return 0;
}

}  // namespace geopretext
