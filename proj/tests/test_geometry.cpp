#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geopretext/geometry.hpp"
#include "geopretext/rng.hpp"
#include "geopretext/synthetic.hpp"

using namespace geopretext;

namespace {

Image random_image(std::uint64_t seed, int h = 32, int w = 32, int c = 3) {
  Image img(h, w, c);
  auto rng = make_rng(seed, 0x696d67);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(d(rng));
  return img;
}

Image scene_image(std::uint64_t seed) {
  return synthesize_image(seed, 2, static_cast<int>(seed % 1000)).image;
}

/// Band-limited image: low-frequency sinusoids, gentle local gradients.
/// Round-trip resampling accuracy is only meaningful away from step edges.
Image smooth_image() {
  Image img(32, 32, 3);
  for (int ch = 0; ch < 3; ++ch) {
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 32; ++c) {
        const double v = 0.5 + 0.22 * std::sin(0.21 * r + 0.6 * ch) +
                         0.22 * std::cos(0.17 * c - 0.3 * ch) +
                         0.06 * std::sin(0.11 * (r + c));
        img.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255));
      }
    }
  }
  return img;
}

int max_abs_diff(const Image& a, const Image& b) {
  int worst = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(int(a.data()[i]) - int(b.data()[i])));
  }
  return worst;
}

// Brute-force per-pixel oracles, written directly from the coordinate-map
// definitions and independent of the library kernels.
namespace oracle {

double fetch(const Image& img, int ch, int r, int c, double fill) {
  if (r < 0 || r >= img.height() || c < 0 || c >= img.width()) return fill;
  return img.at(r, c, ch);
}

double bilinear(const Image& img, int ch, double r, double c, double fill) {
  const int r0 = static_cast<int>(std::floor(r));
  const int c0 = static_cast<int>(std::floor(c));
  const double fr = r - r0;
  const double fc = c - c0;
  double acc = 0.0;
  acc += (1 - fr) * (1 - fc) * fetch(img, ch, r0, c0, fill);
  acc += (1 - fr) * fc * fetch(img, ch, r0, c0 + 1, fill);
  acc += fr * (1 - fc) * fetch(img, ch, r0 + 1, c0, fill);
  acc += fr * fc * fetch(img, ch, r0 + 1, c0 + 1, fill);
  return acc;
}

std::uint8_t quant(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

Image rot90(const Image& img) {
  Image out = img.like();
  for (int ch = 0; ch < img.channels(); ++ch) {
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        out.at(r, c, ch) = img.at(c, img.height() - 1 - r, ch);
      }
    }
  }
  return out;
}

Image shift(const Image& img, int dx, int dy) {
  Image out = img.like();
  for (int ch = 0; ch < img.channels(); ++ch) {
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        const int sr = r - dy;
        const int sc = c - dx;
        out.at(r, c, ch) = static_cast<std::uint8_t>(fetch(img, ch, sr, sc, 0.0));
      }
    }
  }
  return out;
}

Image shear(const Image& img, double f) {
  Image out = img.like();
  const double mid = img.height() / 2.0;
  for (int ch = 0; ch < img.channels(); ++ch) {
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        out.at(r, c, ch) = quant(bilinear(img, ch, r, c - f * (r - mid), 0.0));
      }
    }
  }
  return out;
}

Image scale(const Image& img, double f) {
  Image out = img.like();
  const double cr = img.height() / 2.0;
  const double cc = img.width() / 2.0;
  for (int ch = 0; ch < img.channels(); ++ch) {
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        out.at(r, c, ch) = quant(bilinear(img, ch, cr + (r - cr) / f, cc + (c - cc) / f, 0.0));
      }
    }
  }
  return out;
}

Image rotate(const Image& img, double deg, double fill) {
  Image out = img.like();
  const double rad = deg * std::numbers::pi / 180.0;
  const double cr = (img.height() - 1) / 2.0;
  const double cc = (img.width() - 1) / 2.0;
  for (int ch = 0; ch < img.channels(); ++ch) {
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        const double sr = cr + std::cos(rad) * (r - cr) + std::sin(rad) * (c - cc);
        const double sc = cc - std::sin(rad) * (r - cr) + std::cos(rad) * (c - cc);
        out.at(r, c, ch) = quant(bilinear(img, ch, sr, sc, fill));
      }
    }
  }
  return out;
}

}  // namespace oracle
}  // namespace

TEST_CASE("rotate_quarter identities and composition") {
  const Image x = scene_image(3);
  CHECK(rotate_quarter(x, 0) == x);
  CHECK(rotate_quarter(rotate_quarter(x, 2), 2) == x);
  CHECK_THROWS_AS((void)rotate_quarter(x, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)rotate_quarter(x, -1), std::invalid_argument);
}

TEST_CASE("rotate_quarter group law on random images") {
  for (std::uint64_t s = 0; s < 24; ++s) {
    const Image x = random_image(s);
    for (int k1 = 0; k1 < 4; ++k1) {
      for (int k2 = 0; k2 < 4; ++k2) {
        CHECK(rotate_quarter(rotate_quarter(x, k1), k2) == rotate_quarter(x, (k1 + k2) % 4));
      }
    }
  }
}

TEST_CASE("rotate_quarter k=1 matches the coordinate-map oracle exactly") {
  const Image x = random_image(11);
  const Image got = rotate_quarter(x, 1);
  CHECK(got == oracle::rot90(x));
  // spot check of the published map: out(r, c) = in(c, H-1-r)
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      CHECK(got.at(r, c, 0) == x.at(c, 31 - r, 0));
    }
  }
}

TEST_CASE("rotate_quarter preserves the pixel multiset") {
  const Image x = random_image(5);
  for (int k = 0; k < 4; ++k) {
    auto a = x.data();
    auto b = rotate_quarter(x, k).data();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("rotate_degrees identity, quarter agreement, corner fill") {
  const Image x = scene_image(17);
  CHECK(rotate_degrees(x, 0, 0) == x);

  const Image by_deg = rotate_degrees(x, 90, 0);
  const Image exact = rotate_quarter(x, 1);
  CHECK(max_abs_diff(by_deg, exact) <= 1);

  const Image r45 = rotate_degrees(x, 45, 0);
  for (int ch = 0; ch < 3; ++ch) {
    CHECK(r45.at(0, 0, ch) == 0);
    CHECK(r45.at(0, 31, ch) == 0);
    CHECK(r45.at(31, 0, ch) == 0);
    CHECK(r45.at(31, 31, ch) == 0);
  }
  // non-zero fill reaches the unsupported corners
  const Image r45f = rotate_degrees(x, 45, 200);
  CHECK(r45f.at(0, 0, 0) == 200);
  CHECK_THROWS_AS((void)rotate_degrees(x, 181, 0), std::invalid_argument);
}

TEST_CASE("rotate_degrees matches oracle at odd angles") {
  const Image x = scene_image(23);
  for (double deg : {45.0, -30.0, 135.0, 180.0}) {
    CHECK(max_abs_diff(rotate_degrees(x, deg, 0), oracle::rotate(x, deg, 0.0)) <= 1);
  }
}

TEST_CASE("shear basics") {
  const Image x = scene_image(29);
  CHECK(shear(x, 0.0) == x);
  CHECK_THROWS_AS((void)shear(x, 1.5), std::invalid_argument);

  // center row r = H/2 maps to itself
  const Image sh = shear(x, 0.3);
  for (int c = 0; c < 32; ++c) {
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(sh.at(16, c, ch) == x.at(16, c, ch));
    }
  }
  CHECK(max_abs_diff(sh, oracle::shear(x, 0.3)) <= 1);
}

TEST_CASE("shear mirror symmetry") {
  const Image x = scene_image(31);
  auto fliph = [](const Image& img) {
    Image out = img.like();
    for (int ch = 0; ch < img.channels(); ++ch) {
      for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
          out.at(r, c, ch) = img.at(r, img.width() - 1 - c, ch);
        }
      }
    }
    return out;
  };
  const Image lhs = shear(x, 0.3);
  const Image rhs = fliph(shear(fliph(x), -0.3));
  CHECK(max_abs_diff(lhs, rhs) <= 1);
}

TEST_CASE("scale identity, support, round trip") {
  const Image x = scene_image(37);
  CHECK(scale_about_center(x, 1.0) == x);
  CHECK_THROWS_AS((void)scale_about_center(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)scale_about_center(x, -2.0), std::invalid_argument);

  // shrink by 0.7: content support is the centered 23x23 region [5, 27]
  const Image small = scale_about_center(x, 0.7);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      if (r >= 5 && r <= 27 && c >= 5 && c <= 27) continue;
      for (int ch = 0; ch < 3; ++ch) CHECK(small.at(r, c, ch) == 0);
    }
  }
  CHECK(max_abs_diff(small, oracle::scale(x, 0.7)) <= 1);

  // enlarge then undo: central 16x16 crop agrees within resampling error
  // (on a band-limited image; step edges lose more to double interpolation)
  const Image sm = smooth_image();
  const Image round = scale_about_center(scale_about_center(sm, 1.3), 1.0 / 1.3);
  int worst = 0;
  for (int r = 8; r < 24; ++r) {
    for (int c = 8; c < 24; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        worst = std::max(worst, std::abs(int(round.at(r, c, ch)) - int(sm.at(r, c, ch))));
      }
    }
  }
  CHECK(worst <= 3);
}

TEST_CASE("translate shift and vacated band") {
  const Image x = scene_image(41);
  CHECK(translate(x, 0, 0) == x);
  CHECK_THROWS_AS((void)translate(x, 32, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)translate(x, 0, -32), std::invalid_argument);

  const Image t = translate(x, 8, 0);
  CHECK(t == oracle::shift(x, 8, 0));
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 8; ++c) {
      for (int ch = 0; ch < 3; ++ch) CHECK(t.at(r, c, ch) == 0);
    }
    for (int c = 8; c < 32; ++c) {
      for (int ch = 0; ch < 3; ++ch) CHECK(t.at(r, c, ch) == x.at(r, c - 8, ch));
    }
  }

  // information in the vacated band is destroyed by a round trip
  const Image back = translate(t, -8, 0);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        if (c >= 24) {
          CHECK(back.at(r, c, ch) == 0);
        } else {
          CHECK(back.at(r, c, ch) == x.at(r, c, ch));
        }
      }
    }
  }
}

TEST_CASE("translate with full overlap preserves the retained pixel multiset") {
  const Image x = random_image(43);
  const Image t = translate(x, 8, 0);
  std::vector<std::uint8_t> kept, moved;
  for (int ch = 0; ch < 3; ++ch) {
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 24; ++c) kept.push_back(x.at(r, c, ch));
      for (int c = 8; c < 32; ++c) moved.push_back(t.at(r, c, ch));
    }
  }
  std::sort(kept.begin(), kept.end());
  std::sort(moved.begin(), moved.end());
  CHECK(kept == moved);
}

TEST_CASE("kernels are deterministic and zero-fill is exact") {
  const Image x = scene_image(47);
  CHECK(shear(x, 0.3) == shear(x, 0.3));
  CHECK(scale_about_center(x, 0.7) == scale_about_center(x, 0.7));
  CHECK(rotate_degrees(x, 33, 0) == rotate_degrees(x, 33, 0));

  // every unsupported pixel of a shear is exactly 0 in all channels
  const Image sh = shear(x, 0.5);
  const double mid = 16.0;
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      const double src = c - 0.5 * (r - mid);
      if (src <= -1.0 || src >= 32.0) {
        for (int ch = 0; ch < 3; ++ch) CHECK(sh.at(r, c, ch) == 0);
      }
    }
  }
}

TEST_CASE("make_transform_set canonical compositions") {
  const auto rot2 = make_transform_set("rot2");
  REQUIRE(rot2.K() == 2);
  CHECK(rot2.members[0] == TransformSpec::quarter(0));
  CHECK(rot2.members[1] == TransformSpec::quarter(2));

  const auto rot4 = make_transform_set("rot4");
  REQUIRE(rot4.K() == 4);
  for (int k = 0; k < 4; ++k) CHECK(rot4.members[k] == TransformSpec::quarter(k));

  const auto rot8 = make_transform_set("rot8");
  REQUIRE(rot8.K() == 8);
  CHECK(rot8.members[0] == TransformSpec::quarter(0));
  CHECK(rot8.members[2] == TransformSpec::quarter(1));
  CHECK(rot8.members[4] == TransformSpec::quarter(2));
  CHECK(rot8.members[6] == TransformSpec::quarter(3));
  CHECK(rot8.members[1] == TransformSpec::rotation(45));
  CHECK(rot8.members[5] == TransformSpec::rotation(-135));
  CHECK(rot8.members[7] == TransformSpec::rotation(-45));

  CHECK(make_transform_set("affine5").K() == 5);
  CHECK(make_transform_set("affine10").K() == 10);
  CHECK_THROWS_AS((void)make_transform_set("rot16"), std::invalid_argument);
}

TEST_CASE("apply_transform dispatch and label bijection") {
  const Image x = scene_image(53);
  const auto rot2 = make_transform_set("rot2");
  CHECK(apply_transform(x, rot2, 0) == x);
  const auto rot4 = make_transform_set("rot4");
  CHECK(apply_transform(x, rot4, 2) == rotate_quarter(x, 2));
  CHECK_THROWS_AS((void)apply_transform(x, rot4, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)apply_transform(x, rot4, -1), std::invalid_argument);

  // distinct labels give pairwise distinct outputs on generic scene images
  for (const char* name : {"affine5", "affine10", "rot8"}) {
    const auto set = make_transform_set(name);
    std::vector<Image> outs;
    for (int y = 0; y < set.K(); ++y) outs.push_back(apply_transform(x, set, y));
    for (std::size_t i = 0; i < outs.size(); ++i) {
      for (std::size_t j = i + 1; j < outs.size(); ++j) {
        CHECK(!(outs[i] == outs[j]));
      }
    }
  }
}

TEST_CASE("golden transformed images are reproduced byte for byte") {
  const std::filesystem::path dir = GEOPRETEXT_FIXTURES_DIR;
  const Image base = read_ppm(dir / "base.ppm");
  CHECK(rotate_quarter(base, 1) == read_ppm(dir / "rot90.ppm"));
  CHECK(rotate_quarter(base, 2) == read_ppm(dir / "rot180.ppm"));
  CHECK(rotate_degrees(base, 45, 0) == read_ppm(dir / "rotdeg45.ppm"));
  CHECK(shear(base, 0.3) == read_ppm(dir / "shear_p03.ppm"));
  CHECK(scale_about_center(base, 0.7) == read_ppm(dir / "scale_07.ppm"));
  CHECK(scale_about_center(base, 1.3) == read_ppm(dir / "scale_13.ppm"));
  CHECK(translate(base, 8, 0) == read_ppm(dir / "translate_8_0.ppm"));
}

TEST_CASE("custom sets validate members") {
  CHECK_THROWS_AS((void)make_custom_set({}), std::invalid_argument);
  CHECK_THROWS_AS(
      (void)make_custom_set({TransformSpec::quarter(1), TransformSpec::quarter(1)}),
      std::invalid_argument);
  const auto set = make_custom_set({TransformSpec::identity_op(), TransformSpec::shear_op(0.2)});
  CHECK(set.K() == 2);
}
