#include "geopretext/image.hpp"

#include <fstream>
#include <string>

#include "geopretext/errors.hpp"

namespace geopretext {

void write_ppm(const std::filesystem::path& path, const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw std::invalid_argument("write_ppm: image must have 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("write_ppm: cannot open " + path.string());
  out << (img.channels() == 3 ? "P6" : "P5") << "\n"
      << img.width() << " " << img.height() << "\n255\n";
  // planar -> interleaved
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()) * img.channels());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      for (int ch = 0; ch < img.channels(); ++ch) {
        row[static_cast<std::size_t>(c) * img.channels() + ch] = img.at(r, c, ch);
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IngestionError("write_ppm: short write to " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("read_ppm: cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if ((magic != "P6" && magic != "P5") || maxval != 255 || w <= 0 || h <= 0) {
    throw FormatError("read_ppm: unsupported header in " + path.string());
  }
  in.get();  // single whitespace after maxval
  const int channels = magic == "P6" ? 3 : 1;
  Image img(h, w, channels);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * channels);
  for (int r = 0; r < h; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw FormatError("read_ppm: truncated pixel data in " + path.string());
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        img.at(r, c, ch) = row[static_cast<std::size_t>(c) * channels + ch];
      }
    }
  }
  return img;
}

}  // namespace geopretext
