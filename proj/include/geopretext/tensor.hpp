#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace geopretext {

template <class T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapRM = Eigen::Map<MatRM<T>>;
template <class T>
using ConstMapRM = Eigen::Map<const MatRM<T>>;
template <class T>
using VecMap = Eigen::Map<Eigen::Vector<T, Eigen::Dynamic>>;
template <class T>
using ConstVecMap = Eigen::Map<const Eigen::Vector<T, Eigen::Dynamic>>;

/// Dense activation block in NCHW order. Fully-connected activations use
/// h = w = 1 so every layer speaks the same type.
template <class T>
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(n_) * c_ * h_ * w_, T(0)) {}

  std::size_t size() const { return v.size(); }
  std::size_t per_image() const { return static_cast<std::size_t>(c) * h * w; }

  T* image(int i) { return v.data() + per_image() * static_cast<std::size_t>(i); }
  const T* image(int i) const { return v.data() + per_image() * static_cast<std::size_t>(i); }

  /// Image i viewed as channels x (h*w), the layout conv GEMMs want.
  MapRM<T> image_mat(int i) { return MapRM<T>(image(i), c, static_cast<Eigen::Index>(h) * w); }
  ConstMapRM<T> image_mat(int i) const {
    return ConstMapRM<T>(image(i), c, static_cast<Eigen::Index>(h) * w);
  }

  /// Whole tensor viewed as n x (c*h*w); rows are samples.
  MapRM<T> rows() { return MapRM<T>(v.data(), n, static_cast<Eigen::Index>(per_image())); }
  ConstMapRM<T> rows() const {
    return ConstMapRM<T>(v.data(), n, static_cast<Eigen::Index>(per_image()));
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string shape_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
           "," + std::to_string(w) + ")";
  }
};

template <class T>
void require_shape(const Tensor<T>& x, int c, int h, int w, const char* who) {
  if (x.c != c || x.h != h || x.w != w) {
    throw std::invalid_argument(std::string(who) + ": expected (*, " + std::to_string(c) +
                                "," + std::to_string(h) + "," + std::to_string(w) +
                                "), got " + x.shape_str());
  }
}

}  // namespace geopretext
