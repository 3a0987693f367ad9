#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace geopretext {

/// Row-major byte plane, the unit the transform kernels work on.
using Plane = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PlaneMap = Eigen::Map<Plane>;
using ConstPlaneMap = Eigen::Map<const Plane>;

/// 8-bit image stored channel-planar (C planes of H x W), matching the
/// CIFAR-10 record layout. CIFAR images are 32x32x3 but the type is generic.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels)
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<std::size_t>(height) * width * channels, 0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  std::uint8_t at(int r, int c, int ch) const {
    return data_[plane_size() * ch + static_cast<std::size_t>(r) * width_ + c];
  }
  std::uint8_t& at(int r, int c, int ch) {
    return data_[plane_size() * ch + static_cast<std::size_t>(r) * width_ + c];
  }

  PlaneMap plane(int ch) {
    return PlaneMap(data_.data() + plane_size() * ch, height_, width_);
  }
  ConstPlaneMap plane(int ch) const {
    return ConstPlaneMap(data_.data() + plane_size() * ch, height_, width_);
  }

  /// Same shape, zeroed pixels.
  Image like() const { return Image(height_, width_, channels_); }

  friend bool operator==(const Image& a, const Image& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.channels_ == b.channels_ && a.data_ == b.data_;
  }

 private:
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Lossless PPM (P6) / PGM (P5) io for fixtures and dataset export.
void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);

}  // namespace geopretext
