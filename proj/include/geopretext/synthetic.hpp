#pragma once

#include <cstdint>

#include "geopretext/cifar.hpp"

namespace geopretext {

/// Procedural stand-in corpus with the CIFAR-10 shape: 32x32x3 images in ten
/// balanced classes, split into train/test. Each class renders a distinct
/// figure (disk, ring, square, diamond, triangle, plus, stripes, checker,
/// cross) over a sky/ground scene whose vertical light gradient gives
/// rotation prediction something to latch onto. Generation is a pure function
/// of (seed, split, index), so corpora are reproducible and parallel-safe.
struct SyntheticSpec {
  int train = 50000;
  int test = 10000;
  std::uint64_t seed = 7;
};

/// Class label is index % 10, so any multiple of 10 is exactly balanced.
LabeledImage synthesize_image(std::uint64_t corpus_seed, int split, int index);

CifarData make_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace geopretext
