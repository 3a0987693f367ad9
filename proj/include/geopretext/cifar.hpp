#pragma once

#include <filesystem>
#include <vector>

#include "geopretext/image.hpp"

namespace geopretext {

struct LabeledImage {
  Image image;
  int class_label = 0;  // 0..9
};

struct CifarData {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
};

inline constexpr int kCifarDim = 32;
inline constexpr int kCifarChannels = 3;
inline constexpr int kCifarClasses = 10;
inline constexpr std::size_t kCifarRecordBytes = 3073;  // 1 label + 3x1024 pixels
inline constexpr std::size_t kCifarBatchRecords = 10000;

/// Loads the CIFAR-10 "binary version": data_batch_{1..5}.bin + test_batch.bin,
/// each a sequence of 3073-byte records (label byte, then 1024 R / 1024 G /
/// 1024 B row-major bytes). Returns 50,000 train and 10,000 test images.
///
/// Missing or short files raise IngestionError naming the file; a file whose
/// size is not a multiple of the record length raises FormatError.
CifarData load_cifar10(const std::filesystem::path& directory);

/// Reads one batch file (any record count). Building block for load_cifar10,
/// exposed for tests against fabricated batch files.
std::vector<LabeledImage> read_cifar_batch(const std::filesystem::path& file);

}  // namespace geopretext
