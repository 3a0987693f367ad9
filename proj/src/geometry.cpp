#include "geopretext/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace geopretext {
namespace {

std::uint8_t round_to_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

/// Bilinear sample of one plane at (r, c); coordinates outside [0,H)x[0,W)
/// read `fill`.
double sample_bilinear(ConstPlaneMap p, double r, double c, double fill) {
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  const double rf = std::floor(r);
  const double cf = std::floor(c);
  const int r0 = static_cast<int>(rf);
  const int c0 = static_cast<int>(cf);
  const double ar = r - rf;
  const double ac = c - cf;

  auto at = [&](int rr, int cc) -> double {
    if (rr < 0 || rr >= h || cc < 0 || cc >= w) return fill;
    return static_cast<double>(p(rr, cc));
  };

  const double top = (1.0 - ac) * at(r0, c0) + ac * at(r0, c0 + 1);
  const double bot = (1.0 - ac) * at(r0 + 1, c0) + ac * at(r0 + 1, c0 + 1);
  return (1.0 - ar) * top + ar * bot;
}

/// Inverse-map warp: out(r, c) = bilinear(in, src(r, c)).
template <class SrcFn>
Image warp(const Image& img, std::uint8_t fill, SrcFn&& src) {
  Image out = img.like();
  for (int ch = 0; ch < img.channels(); ++ch) {
    ConstPlaneMap in = img.plane(ch);
    PlaneMap dst = out.plane(ch);
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        const auto [sr, sc] = src(r, c);
        dst(r, c) = round_to_u8(sample_bilinear(in, sr, sc, fill));
      }
    }
  }
  return out;
}

}  // namespace

Image rotate_quarter(const Image& img, int k) {
  if (k < 0 || k > 3) {
    throw std::invalid_argument("rotate_quarter: k must be in {0,1,2,3}, got " + std::to_string(k));
  }
  if (k % 2 == 1 && img.height() != img.width()) {
    throw std::invalid_argument("rotate_quarter: odd quarter turns require a square image");
  }
  Image out = img.like();
  for (int ch = 0; ch < img.channels(); ++ch) {
    ConstPlaneMap in = img.plane(ch);
    PlaneMap dst = out.plane(ch);
    switch (k) {
      case 0: dst = in; break;
      // out(r,c) = in(c, H-1-r): flip columns, then transpose
      case 1: dst = in.rowwise().reverse().transpose(); break;
      case 2: dst = in.reverse(); break;
      // out(r,c) = in(W-1-c, r)
      case 3: dst = in.colwise().reverse().transpose(); break;
      default: break;
    }
  }
  return out;
}

Image rotate_degrees(const Image& img, double theta, std::uint8_t fill) {
  if (!(theta >= -180.0 && theta <= 180.0)) {
    throw std::invalid_argument("rotate_degrees: theta must be in [-180, 180]");
  }
  const double rad = theta * std::numbers::pi / 180.0;
  const double ct = std::cos(rad);
  const double st = std::sin(rad);
  const double cr = (img.height() - 1) / 2.0;
  const double cc = (img.width() - 1) / 2.0;
  return warp(img, fill, [&](int r, int c) {
    const double dr = r - cr;
    const double dc = c - cc;
    return std::pair{cr + ct * dr + st * dc, cc - st * dr + ct * dc};
  });
}

Image shear(const Image& img, double factor) {
  if (!(std::abs(factor) <= 1.0)) {
    throw std::invalid_argument("shear: |factor| must be <= 1");
  }
  const double mid = img.height() / 2.0;
  return warp(img, 0, [&](int r, int c) {
    return std::pair{static_cast<double>(r), c - factor * (r - mid)};
  });
}

Image scale_about_center(const Image& img, double factor) {
  if (!(factor > 0.0) || factor > 4.0) {
    throw std::invalid_argument("scale_about_center: factor must be in (0, 4]");
  }
  const double cr = img.height() / 2.0;
  const double cc = img.width() / 2.0;
  return warp(img, 0, [&](int r, int c) {
    return std::pair{cr + (r - cr) / factor, cc + (c - cc) / factor};
  });
}

Image translate(const Image& img, int dx, int dy) {
  if (std::abs(dx) >= img.width() || std::abs(dy) >= img.height()) {
    throw std::invalid_argument("translate: |dx| < W and |dy| < H required");
  }
  Image out = img.like();
  for (int ch = 0; ch < img.channels(); ++ch) {
    ConstPlaneMap in = img.plane(ch);
    PlaneMap dst = out.plane(ch);
    for (int r = 0; r < img.height(); ++r) {
      const int sr = r - dy;
      if (sr < 0 || sr >= img.height()) continue;
      for (int c = 0; c < img.width(); ++c) {
        const int sc = c - dx;
        if (sc < 0 || sc >= img.width()) continue;
        dst(r, c) = in(sr, sc);
      }
    }
  }
  return out;
}

TransformSpec TransformSpec::identity_op() { return {}; }

TransformSpec TransformSpec::quarter(int k) {
  TransformSpec s;
  s.kind = TransformKind::rotate_quarter;
  s.quarter_turns = k;
  return s;
}

TransformSpec TransformSpec::rotation(double degrees) {
  TransformSpec s;
  s.kind = TransformKind::rotate_degrees;
  s.degrees = degrees;
  return s;
}

TransformSpec TransformSpec::shear_op(double factor) {
  TransformSpec s;
  s.kind = TransformKind::shear;
  s.factor = factor;
  return s;
}

TransformSpec TransformSpec::scale_op(double factor) {
  TransformSpec s;
  s.kind = TransformKind::scale;
  s.factor = factor;
  return s;
}

TransformSpec TransformSpec::translate_op(int dx, int dy) {
  TransformSpec s;
  s.kind = TransformKind::translate;
  s.dx = dx;
  s.dy = dy;
  return s;
}

void TransformSpec::validate(int height, int width) const {
  switch (kind) {
    case TransformKind::identity:
      break;
    case TransformKind::rotate_quarter:
      if (quarter_turns < 0 || quarter_turns > 3) {
        throw std::invalid_argument("TransformSpec: quarter_turns out of {0,1,2,3}");
      }
      break;
    case TransformKind::rotate_degrees:
      if (!(degrees >= -180.0 && degrees <= 180.0)) {
        throw std::invalid_argument("TransformSpec: degrees out of [-180, 180]");
      }
      break;
    case TransformKind::shear:
      if (!(std::abs(factor) <= 1.0)) {
        throw std::invalid_argument("TransformSpec: |shear factor| > 1");
      }
      break;
    case TransformKind::scale:
      if (!(factor > 0.0) || factor > 4.0) {
        throw std::invalid_argument("TransformSpec: scale factor out of (0, 4]");
      }
      break;
    case TransformKind::translate:
      if (std::abs(dx) >= width || std::abs(dy) >= height) {
        throw std::invalid_argument("TransformSpec: translation offsets out of range");
      }
      break;
  }
}

std::string TransformSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case TransformKind::identity: os << "identity"; break;
    case TransformKind::rotate_quarter: os << "rot" << 90 * quarter_turns; break;
    case TransformKind::rotate_degrees: os << "rotdeg" << degrees; break;
    case TransformKind::shear: os << "shear" << factor; break;
    case TransformKind::scale: os << "scale" << factor; break;
    case TransformKind::translate: os << "translate(" << dx << "," << dy << ")"; break;
  }
  return os.str();
}

Image apply_spec(const Image& img, const TransformSpec& spec) {
  switch (spec.kind) {
    case TransformKind::identity: return img;
    case TransformKind::rotate_quarter: return rotate_quarter(img, spec.quarter_turns);
    case TransformKind::rotate_degrees: return rotate_degrees(img, spec.degrees, 0);
    case TransformKind::shear: return shear(img, spec.factor);
    case TransformKind::scale: return scale_about_center(img, spec.factor);
    case TransformKind::translate: return translate(img, spec.dx, spec.dy);
  }
  throw std::invalid_argument("apply_spec: unknown transform kind");
}

namespace {

/// Angles outside (-180, 180] are mapped to the equivalent angle inside.
TransformSpec rotation_member(int degrees) {
  degrees %= 360;
  if (degrees % 90 == 0) return TransformSpec::quarter(((degrees / 90) % 4 + 4) % 4);
  if (degrees > 180) degrees -= 360;
  return TransformSpec::rotation(degrees);
}

}  // namespace

TransformSet make_transform_set(const std::string& name) {
  TransformSet set;
  set.name = name;
  if (name == "rot2") {
    set.members = {TransformSpec::quarter(0), TransformSpec::quarter(2)};
  } else if (name == "rot4") {
    set.members = {TransformSpec::quarter(0), TransformSpec::quarter(1),
                   TransformSpec::quarter(2), TransformSpec::quarter(3)};
  } else if (name == "rot8") {
    for (int i = 0; i < 8; ++i) set.members.push_back(rotation_member(45 * i));
  } else if (name == "affine5") {
    set.members = {TransformSpec::identity_op(), TransformSpec::quarter(2),
                   TransformSpec::shear_op(0.3), TransformSpec::scale_op(0.7),
                   TransformSpec::translate_op(8, 0)};
  } else if (name == "affine10") {
    set.members = {TransformSpec::identity_op(),      TransformSpec::quarter(1),
                   TransformSpec::quarter(2),         TransformSpec::quarter(3),
                   TransformSpec::shear_op(0.3),      TransformSpec::shear_op(-0.3),
                   TransformSpec::scale_op(0.7),      TransformSpec::scale_op(1.3),
                   TransformSpec::translate_op(8, 0), TransformSpec::translate_op(-8, 0)};
  } else {
    throw std::invalid_argument("make_transform_set: unknown set name '" + name + "'");
  }
  return set;
}

TransformSet make_custom_set(std::vector<TransformSpec> members, const std::string& name) {
  if (members.empty()) throw std::invalid_argument("make_custom_set: empty member list");
  for (std::size_t i = 0; i < members.size(); ++i) {
    members[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (members[i] == members[j]) {
        throw std::invalid_argument("make_custom_set: duplicate member " + members[i].describe());
      }
    }
  }
  return TransformSet{name, std::move(members)};
}

bool is_known_set_name(const std::string& name) {
  for (const auto& n : known_set_names()) {
    if (n == name) return true;
  }
  return false;
}

std::vector<std::string> known_set_names() {
  return {"rot2", "rot4", "rot8", "affine5", "affine10"};
}

Image apply_transform(const Image& img, const TransformSet& set, int y) {
  if (y < 0 || y >= set.K()) {
    throw std::invalid_argument("apply_transform: label " + std::to_string(y) +
                                " out of range for K=" + std::to_string(set.K()));
  }
  return apply_spec(img, set.members[static_cast<std::size_t>(y)]);
}

}  // namespace geopretext
