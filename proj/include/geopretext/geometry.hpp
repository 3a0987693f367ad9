#pragma once

#include <string>
#include <vector>

#include "geopretext/image.hpp"

namespace geopretext {

// ---------------------------------------------------------------------------
// Transform kernels. All are pure, shape preserving and deterministic; pixels
// with no source support are set to the fill value (0 unless stated).
// ---------------------------------------------------------------------------

/// Exact rotation by 90*k degrees, implemented with transpose and axis flips
/// only (no interpolation). k must be in {0,1,2,3}; odd k requires H == W.
/// For k=1 the output pixel (r, c) equals the input pixel (c, H-1-r).
Image rotate_quarter(const Image& img, int k);

/// Rotation by `theta` degrees about the image center ((H-1)/2, (W-1)/2)
/// with bilinear resampling; samples outside the support read `fill`.
/// theta must lie in [-180, 180]. theta = 90k reproduces rotate_quarter(k)
/// up to resampling rounding (<= 1 intensity level).
Image rotate_degrees(const Image& img, double theta, std::uint8_t fill = 0);

/// Horizontal shear about the image center line r = H/2: the source column
/// for output (r, c) is c - factor*(r - H/2). Bilinear resampling, zero fill.
/// |factor| must be <= 1.
Image shear(const Image& img, double factor);

/// Isotropic scaling about the image center (H/2, W/2) at fixed canvas size.
/// factor < 1 shrinks content inside a zero border, factor > 1 enlarges and
/// crops. Bilinear resampling. factor must lie in (0, 4].
Image scale_about_center(const Image& img, double factor);

/// Integer shift by (dx, dy): output (r, c) = input (r - dy, c - dx); the
/// vacated band is exactly 0. Requires |dx| < W and |dy| < H.
Image translate(const Image& img, int dx, int dy);

// ---------------------------------------------------------------------------
// Pretext label spaces.
// ---------------------------------------------------------------------------

enum class TransformKind {
  identity,
  rotate_quarter,
  rotate_degrees,
  shear,
  scale,
  translate,
};

/// One member of a pretext label space. Only the fields of the active kind
/// are meaningful.
struct TransformSpec {
  TransformKind kind = TransformKind::identity;
  int quarter_turns = 0;   // rotate_quarter: k in {0,1,2,3}
  double degrees = 0.0;    // rotate_degrees: [-180, 180]
  double factor = 0.0;     // shear: |f| <= 1; scale: (0, 4]
  int dx = 0, dy = 0;      // translate: |dx| < W, |dy| < H

  static TransformSpec identity_op();
  static TransformSpec quarter(int k);
  static TransformSpec rotation(double degrees);
  static TransformSpec shear_op(double factor);
  static TransformSpec scale_op(double factor);
  static TransformSpec translate_op(int dx, int dy);

  /// Throws std::invalid_argument if any parameter is out of range
  /// (image dims are needed to range-check translation offsets).
  void validate(int height = 32, int width = 32) const;

  std::string describe() const;
  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

Image apply_spec(const Image& img, const TransformSpec& spec);

/// Ordered set of K transforms; the member index is the pretext class label.
struct TransformSet {
  std::string name;
  std::vector<TransformSpec> members;

  int K() const { return static_cast<int>(members.size()); }
};

/// Canonical named sets:
///   rot2     {0, 180} degrees                          (K = 2)
///   rot4     {0, 90, 180, 270} degrees                 (K = 4)
///   rot8     multiples of 45 degrees                   (K = 8)
///   affine5  identity, 180, shear +0.3, scale 0.7, translate (+8, 0)
///   affine10 identity, 90/180/270, shear +-0.3, scale 0.7/1.3,
///            translate (+8, 0)/(-8, 0)
/// Quarter-turn members use the exact kernel; other rotations resample.
TransformSet make_transform_set(const std::string& name);

/// User-defined label space; members must be distinct and valid.
TransformSet make_custom_set(std::vector<TransformSpec> members,
                             const std::string& name = "custom");

bool is_known_set_name(const std::string& name);
std::vector<std::string> known_set_names();

/// set.members[y] applied to img; y outside [0, K) throws.
Image apply_transform(const Image& img, const TransformSet& set, int y);

}  // namespace geopretext
