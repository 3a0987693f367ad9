#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include "geopretext/cifar.hpp"
#include "geopretext/geometry.hpp"

namespace geopretext {

enum class PretextMethod { separate, random };

/// A transformed image with its pretext label and originating source index.
struct PretextSample {
  Image image;
  int transform_label = 0;
  int source_index = 0;
  int class_label = 0;
};

struct SampleKey {
  int source_index;
  int transform_label;
  friend bool operator==(const SampleKey&, const SampleKey&) = default;
};

/// Pretext dataset over a shared source list. Samples are described by
/// (source_index, transform_label) keys and materialized on demand, so the
/// 600k-sample configurations never live in memory at once. (seed, set,
/// method) fully determine every sample, bit for bit.
class PretextDataset {
 public:
  using Sources = std::shared_ptr<const std::vector<LabeledImage>>;

  /// Method 1: each transform applied separately to each image; exactly K
  /// copies per source in source-major, label-minor order.
  static PretextDataset separate(Sources sources, TransformSet set);

  /// Method 2: `copies` samples per source, each with a transform drawn
  /// uniformly from the set by a generator seeded with `seed`.
  static PretextDataset random(Sources sources, TransformSet set, int copies,
                               std::uint64_t seed);

  std::size_t size() const;
  int K() const { return set_.K(); }
  PretextMethod method() const { return method_; }
  std::uint64_t seed() const { return seed_; }
  int copies_per_source() const { return copies_; }
  const TransformSet& set() const { return set_; }
  const std::vector<LabeledImage>& sources() const { return *sources_; }
  std::size_t num_sources() const { return sources_->size(); }

  SampleKey key(std::size_t i) const;
  PretextSample materialize(std::size_t i) const;
  PretextSample materialize(const SampleKey& k) const;

  /// Count of samples per transform label (no materialization).
  std::vector<std::size_t> label_histogram() const;

 private:
  PretextDataset() = default;

  Sources sources_;
  TransformSet set_;
  PretextMethod method_ = PretextMethod::separate;
  std::uint64_t seed_ = 0;
  int copies_ = 0;
  std::vector<std::uint8_t> random_labels_;  // method 2 only, one per sample
};

/// One epoch of batches as sample keys. Grouped mode keeps all copies of a
/// source image in the same batch and requires batch_size to be divisible by
/// the copies-per-source count; violations raise ConfigError. Source order is
/// shuffled by epoch_seed. Flat mode shuffles samples individually.
std::vector<std::vector<SampleKey>> pretext_batches(const PretextDataset& ds,
                                                    int batch_size,
                                                    std::uint64_t epoch_seed,
                                                    bool grouped = true);

/// Per-channel mean / stddev of pixel intensities scaled to [0,1].
struct ChannelStats {
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};
};

ChannelStats compute_channel_stats(const std::vector<LabeledImage>& images);

/// Writes one lossless PPM per sample plus manifest.csv with columns
/// sample_id, source_index, transform_label, class_label. `limit` of 0 means
/// all samples.
void export_pretext(const PretextDataset& ds, const std::filesystem::path& dir,
                    std::size_t limit = 0);

}  // namespace geopretext
