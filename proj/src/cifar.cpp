#include "geopretext/cifar.hpp"

#include <fstream>

#include "geopretext/errors.hpp"

namespace geopretext {

std::vector<LabeledImage> read_cifar_batch(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary | std::ios::ate);
  if (!in) throw IngestionError("cifar: missing batch file " + file.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % kCifarRecordBytes != 0) {
    throw FormatError("cifar: " + file.string() + " is " + std::to_string(bytes) +
                      " bytes, not a multiple of the " +
                      std::to_string(kCifarRecordBytes) + "-byte record length");
  }
  in.seekg(0);
  const std::size_t records = bytes / kCifarRecordBytes;
  std::vector<LabeledImage> out(records);
  std::vector<char> record(kCifarRecordBytes);
  for (std::size_t i = 0; i < records; ++i) {
    in.read(record.data(), static_cast<std::streamsize>(record.size()));
    if (!in) throw IngestionError("cifar: short read from " + file.string());
    const auto label = static_cast<unsigned char>(record[0]);
    if (label >= kCifarClasses) {
      throw FormatError("cifar: " + file.string() + " record " + std::to_string(i) +
                        " has class byte " + std::to_string(label));
    }
    LabeledImage& item = out[i];
    item.class_label = label;
    item.image = Image(kCifarDim, kCifarDim, kCifarChannels);
    // record pixels are channel-planar row-major, same as Image storage
    std::copy(record.begin() + 1, record.end(),
              reinterpret_cast<char*>(item.image.data().data()));
  }
  return out;
}

CifarData load_cifar10(const std::filesystem::path& directory) {
  CifarData data;
  data.train.reserve(5 * kCifarBatchRecords);
  for (int b = 1; b <= 5; ++b) {
    const auto file = directory / ("data_batch_" + std::to_string(b) + ".bin");
    auto batch = read_cifar_batch(file);
    if (batch.size() != kCifarBatchRecords) {
      throw IngestionError("cifar: " + file.string() + " holds " +
                           std::to_string(batch.size()) + " records, expected " +
                           std::to_string(kCifarBatchRecords));
    }
    data.train.insert(data.train.end(), std::make_move_iterator(batch.begin()),
                      std::make_move_iterator(batch.end()));
  }
  const auto test_file = directory / "test_batch.bin";
  data.test = read_cifar_batch(test_file);
  if (data.test.size() != kCifarBatchRecords) {
    throw IngestionError("cifar: " + test_file.string() + " holds " +
                         std::to_string(data.test.size()) + " records, expected " +
                         std::to_string(kCifarBatchRecords));
  }
  return data;
}

}  // namespace geopretext
