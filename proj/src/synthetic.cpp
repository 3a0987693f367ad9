#include "geopretext/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "geopretext/rng.hpp"

namespace geopretext {
namespace {

constexpr int kSuper = 2;  // supersampling factor for soft edges
constexpr int kHi = kCifarDim * kSuper;

struct Rgb {
  double r, g, b;
};

/// Signed coverage test for each class figure, in supersampled pixel units
/// relative to the figure center. Returns true when (dr, dc) lies inside.
bool inside_figure(int cls, double dr, double dc, double s) {
  const double ar = std::abs(dr);
  const double ac = std::abs(dc);
  switch (cls) {
    case 0:  // disk
      return dr * dr + dc * dc <= s * s;
    case 1:  // ring
      return dr * dr + dc * dc <= s * s && dr * dr + dc * dc >= 0.55 * 0.55 * s * s;
    case 2:  // square
      return ar <= 0.82 * s && ac <= 0.82 * s;
    case 3:  // diamond
      return ar + ac <= 1.15 * s;
    case 4:  // triangle, apex up
      return dr >= -0.95 * s && dr <= 0.72 * s && ac <= (dr + 0.95 * s) * 0.62;
    case 5:  // plus
      return (ar <= 0.34 * s && ac <= s) || (ac <= 0.34 * s && ar <= s);
    case 6:  // horizontal stripes
      return ar <= 0.9 * s && ac <= 0.9 * s &&
             static_cast<int>(std::floor((dr + 4.0 * s) / (0.45 * s))) % 2 == 0;
    case 7:  // vertical stripes
      return ar <= 0.9 * s && ac <= 0.9 * s &&
             static_cast<int>(std::floor((dc + 4.0 * s) / (0.45 * s))) % 2 == 0;
    case 8:  // checkerboard
      return ar <= 0.9 * s && ac <= 0.9 * s &&
             (static_cast<int>(std::floor((dr + 4.0 * s) / (0.6 * s))) +
              static_cast<int>(std::floor((dc + 4.0 * s) / (0.6 * s)))) % 2 == 0;
    case 9:  // X cross
      return ar <= s && ac <= s && std::abs(ar - ac) <= 0.32 * s;
    default:
      return false;
  }
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

LabeledImage synthesize_image(std::uint64_t corpus_seed, int split, int index) {
  const int cls = index % kCifarClasses;
  auto rng = make_rng(mix64(corpus_seed, static_cast<std::uint64_t>(split)),
                      static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // scene parameters
  const double sky_top = 0.68 + 0.27 * unit(rng);
  const double sky_bottom = 0.40 + 0.18 * unit(rng);
  const double sky_warmth = 0.75 + 0.25 * unit(rng);  // tilts sky toward blue or gray
  const double horizon = (0.70 + 0.14 * unit(rng)) * kHi;
  const double ground_level = 0.14 + 0.20 * unit(rng);
  const double ground_red = 0.8 + 0.4 * unit(rng);

  // figure parameters (units of supersampled pixels)
  const double size = (0.24 + 0.14 * unit(rng)) * kHi;
  const double center_r = kHi / 2.0 + (unit(rng) - 0.5) * 0.34 * kHi;
  const double center_c = kHi / 2.0 + (unit(rng) - 0.5) * 0.34 * kHi;
  // saturated figure color with one dominant channel
  std::array<double, 3> fig = {0.15 + 0.25 * unit(rng), 0.15 + 0.25 * unit(rng),
                               0.15 + 0.25 * unit(rng)};
  fig[static_cast<std::size_t>(rng() % 3)] = 0.75 + 0.25 * unit(rng);

  std::uniform_real_distribution<double> noise(-0.035, 0.035);

  std::vector<Rgb> hi(static_cast<std::size_t>(kHi) * kHi);
  for (int r = 0; r < kHi; ++r) {
    const double t = static_cast<double>(r) / (kHi - 1);
    const double sky = sky_top + (sky_bottom - sky_top) * t;
    for (int c = 0; c < kHi; ++c) {
      Rgb px;
      if (r >= horizon) {
        const double g = ground_level + noise(rng);
        px = {g * ground_red, g, g * 0.55};
      } else {
        px = {sky * 0.82 * sky_warmth, sky * 0.90, sky};
      }
      if (inside_figure(cls, r - center_r, c - center_c, size)) {
        px = {fig[0], fig[1], fig[2]};
      }
      hi[static_cast<std::size_t>(r) * kHi + c] = px;
    }
  }

  LabeledImage out;
  out.class_label = cls;
  out.image = Image(kCifarDim, kCifarDim, kCifarChannels);
  std::uniform_real_distribution<double> pix_noise(-0.02, 0.02);
  for (int r = 0; r < kCifarDim; ++r) {
    for (int c = 0; c < kCifarDim; ++c) {
      Rgb acc{0, 0, 0};
      for (int i = 0; i < kSuper; ++i) {
        for (int j = 0; j < kSuper; ++j) {
          const Rgb& px = hi[static_cast<std::size_t>(r * kSuper + i) * kHi + c * kSuper + j];
          acc.r += px.r;
          acc.g += px.g;
          acc.b += px.b;
        }
      }
      const double inv = 1.0 / (kSuper * kSuper);
      const double n = pix_noise(rng);
      out.image.at(r, c, 0) = quantize(acc.r * inv + n);
      out.image.at(r, c, 1) = quantize(acc.g * inv + n);
      out.image.at(r, c, 2) = quantize(acc.b * inv + n);
    }
  }
  return out;
}

CifarData make_synthetic_corpus(const SyntheticSpec& spec) {
  CifarData data;
  data.train.resize(static_cast<std::size_t>(spec.train));
  data.test.resize(static_cast<std::size_t>(spec.test));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < spec.train; ++i) {
    data.train[static_cast<std::size_t>(i)] = synthesize_image(spec.seed, 0, i);
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < spec.test; ++i) {
    data.test[static_cast<std::size_t>(i)] = synthesize_image(spec.seed, 1, i);
  }
  return data;
}

}  // namespace geopretext
