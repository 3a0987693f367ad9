#include "geopretext/pretext_data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "geopretext/errors.hpp"
#include "geopretext/rng.hpp"

namespace geopretext {

PretextDataset PretextDataset::separate(Sources sources, TransformSet set) {
  if (!sources || sources->empty()) {
    throw std::invalid_argument("PretextDataset::separate: empty image list");
  }
  PretextDataset ds;
  ds.sources_ = std::move(sources);
  ds.set_ = std::move(set);
  ds.method_ = PretextMethod::separate;
  ds.copies_ = ds.set_.K();
  return ds;
}

PretextDataset PretextDataset::random(Sources sources, TransformSet set, int copies,
                                      std::uint64_t seed) {
  if (!sources || sources->empty()) {
    throw std::invalid_argument("PretextDataset::random: empty image list");
  }
  if (copies < 1) {
    throw std::invalid_argument("PretextDataset::random: copies must be >= 1");
  }
  PretextDataset ds;
  ds.sources_ = std::move(sources);
  ds.set_ = std::move(set);
  ds.method_ = PretextMethod::random;
  ds.copies_ = copies;
  ds.seed_ = seed;
  auto rng = make_rng(seed, 0x72616e64);
  std::uniform_int_distribution<int> label(0, ds.set_.K() - 1);
  ds.random_labels_.resize(ds.sources_->size() * static_cast<std::size_t>(copies));
  for (auto& l : ds.random_labels_) l = static_cast<std::uint8_t>(label(rng));
  return ds;
}

std::size_t PretextDataset::size() const {
  return sources_->size() * static_cast<std::size_t>(copies_);
}

SampleKey PretextDataset::key(std::size_t i) const {
  const auto copies = static_cast<std::size_t>(copies_);
  const int source = static_cast<int>(i / copies);
  if (method_ == PretextMethod::separate) {
    return {source, static_cast<int>(i % copies)};
  }
  return {source, static_cast<int>(random_labels_[i])};
}

PretextSample PretextDataset::materialize(std::size_t i) const {
  return materialize(key(i));
}

PretextSample PretextDataset::materialize(const SampleKey& k) const {
  const LabeledImage& src = (*sources_)[static_cast<std::size_t>(k.source_index)];
  PretextSample s;
  s.image = apply_transform(src.image, set_, k.transform_label);
  s.transform_label = k.transform_label;
  s.source_index = k.source_index;
  s.class_label = src.class_label;
  return s;
}

std::vector<std::size_t> PretextDataset::label_histogram() const {
  std::vector<std::size_t> hist(static_cast<std::size_t>(set_.K()), 0);
  if (method_ == PretextMethod::separate) {
    std::fill(hist.begin(), hist.end(), sources_->size());
  } else {
    for (auto l : random_labels_) ++hist[l];
  }
  return hist;
}

std::vector<std::vector<SampleKey>> pretext_batches(const PretextDataset& ds,
                                                    int batch_size,
                                                    std::uint64_t epoch_seed,
                                                    bool grouped) {
  if (batch_size < 1) throw ConfigError("pretext_batches: batch_size must be >= 1");
  std::vector<std::vector<SampleKey>> batches;
  auto rng = make_rng(epoch_seed, 0x62617463);

  if (grouped) {
    const int copies = ds.copies_per_source();
    if (batch_size % copies != 0) {
      throw ConfigError("pretext_batches: grouped mode needs batch_size divisible by " +
                        std::to_string(copies) + ", got " + std::to_string(batch_size));
    }
    const std::size_t per_batch = static_cast<std::size_t>(batch_size) / copies;
    std::vector<std::size_t> order(ds.num_sources());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += per_batch) {
      const std::size_t end = std::min(order.size(), start + per_batch);
      std::vector<SampleKey> batch;
      batch.reserve((end - start) * static_cast<std::size_t>(copies));
      for (std::size_t s = start; s < end; ++s) {
        for (int j = 0; j < copies; ++j) {
          batch.push_back(ds.key(order[s] * static_cast<std::size_t>(copies) +
                                 static_cast<std::size_t>(j)));
        }
      }
      batches.push_back(std::move(batch));
    }
  } else {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(batch_size));
      std::vector<SampleKey> batch;
      batch.reserve(end - start);
      for (std::size_t s = start; s < end; ++s) batch.push_back(ds.key(order[s]));
      batches.push_back(std::move(batch));
    }
  }
  return batches;
}

ChannelStats compute_channel_stats(const std::vector<LabeledImage>& images) {
  if (images.empty()) throw std::invalid_argument("compute_channel_stats: no images");
  ChannelStats stats;
  std::array<double, 3> sum{}, sumsq{};
  std::size_t count = 0;
  for (const auto& item : images) {
    const Image& img = item.image;
    for (int ch = 0; ch < img.channels(); ++ch) {
      ConstPlaneMap p = img.plane(ch);
      for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
          const double v = p(r, c) / 255.0;
          sum[static_cast<std::size_t>(ch)] += v;
          sumsq[static_cast<std::size_t>(ch)] += v * v;
        }
      }
    }
    count += static_cast<std::size_t>(img.height()) * img.width();
  }
  for (std::size_t ch = 0; ch < 3; ++ch) {
    stats.mean[ch] = sum[ch] / static_cast<double>(count);
    const double var = sumsq[ch] / static_cast<double>(count) - stats.mean[ch] * stats.mean[ch];
    stats.stddev[ch] = std::sqrt(std::max(var, 1e-8));
  }
  return stats;
}

void export_pretext(const PretextDataset& ds, const std::filesystem::path& dir,
                    std::size_t limit) {
  std::filesystem::create_directories(dir);
  const std::size_t n = limit == 0 ? ds.size() : std::min(limit, ds.size());
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) throw IngestionError("export_pretext: cannot write manifest in " + dir.string());
  manifest << "sample_id,source_index,transform_label,class_label\n";
  for (std::size_t i = 0; i < n; ++i) {
    const PretextSample s = ds.materialize(i);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%07zu.ppm", i);
    write_ppm(dir / name, s.image);
    manifest << i << "," << s.source_index << "," << s.transform_label << ","
             << s.class_label << "\n";
  }
}

}  // namespace geopretext
