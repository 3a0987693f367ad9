#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "geopretext/rng.hpp"
#include "geopretext/tensor.hpp"

namespace geopretext {

enum class Mode { train, eval };

template <class T>
struct ParamView {
  std::string name;
  std::vector<T>* value = nullptr;
  std::vector<T>* grad = nullptr;  // null for running statistics
  bool is_stat = false;
  bool trainable = true;
  std::size_t fan_in = 0;  // nonzero marks weights that get He-normal init
};

/// Collects parameter views with hierarchical slash-separated names.
template <class T>
class ParamRegistry {
 public:
  void push(const std::string& scope) { scope_.push_back(scope); }
  void pop() { scope_.pop_back(); }

  void add(const std::string& leaf, std::vector<T>* v, std::vector<T>* g,
           std::size_t fan_in = 0) {
    items_.push_back({qualified(leaf), v, g, false, true, fan_in});
  }
  void add_stat(const std::string& leaf, std::vector<T>* v) {
    items_.push_back({qualified(leaf), v, nullptr, true, false, 0});
  }

  std::vector<ParamView<T>>& items() { return items_; }
  const std::vector<ParamView<T>>& items() const { return items_; }

 private:
  std::string qualified(const std::string& leaf) const {
    std::string name;
    for (const auto& s : scope_) {
      name += s;
      name += '/';
    }
    return name + leaf;
  }

  std::vector<std::string> scope_;
  std::vector<ParamView<T>> items_;
};

template <class T>
void zero_grads(std::vector<ParamView<T>>& params) {
  for (auto& p : params) {
    if (p.grad) std::fill(p.grad->begin(), p.grad->end(), T(0));
  }
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int this_thread() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

template <class T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
  virtual void collect(ParamRegistry<T>&) {}
  virtual const char* kind() const = 0;
};

/// Fills `values` with He-normal weights; the stream is derived from the
/// parameter's qualified name so an identical name always gets identical
/// values regardless of what else the model contains. That makes the shared
/// blocks of (arch, b) and (arch, b+1) start from identical parameters.
template <class T>
void he_normal_init(std::vector<T>& values, std::size_t fan_in, std::uint64_t seed,
                    const std::string& name) {
  auto rng = make_rng(seed, fnv1a(name));
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& v : values) v = static_cast<T>(dist(rng));
}

/// Seeds every weight view (fan_in > 0) from (seed, qualified name); biases,
/// batch-norm parameters and running stats keep their constructor defaults.
template <class T>
void init_params(std::vector<ParamView<T>>& params, std::uint64_t seed) {
  for (auto& p : params) {
    if (!p.is_stat && p.fan_in > 0) he_normal_init(*p.value, p.fan_in, seed, p.name);
  }
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

template <class T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(int in_c, int out_c, int k, int stride = 1, int pad = 0, bool bias = true)
      : in_c_(in_c), out_c_(out_c), k_(k), stride_(stride), pad_(pad), has_bias_(bias),
        w_(static_cast<std::size_t>(out_c) * in_c * k * k, T(0)),
        dw_(w_.size(), T(0)),
        b_(bias ? static_cast<std::size_t>(out_c) : 0, T(0)),
        db_(b_.size(), T(0)) {}

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    require_input(x);
    x_ = x;
    const int oh = out_dim(x.h);
    const int ow = out_dim(x.w);
    Tensor<T> y(x.n, out_c_, oh, ow);
    const Eigen::Index cols = static_cast<Eigen::Index>(oh) * ow;
    const Eigen::Index rows = static_cast<Eigen::Index>(in_c_) * k_ * k_;
    ConstMapRM<T> wm(w_.data(), out_c_, rows);
#pragma omp parallel
    {
      std::vector<T> col(static_cast<std::size_t>(rows) * cols);
#pragma omp for schedule(static)
      for (int i = 0; i < x.n; ++i) {
        im2col(x.image(i), x.h, x.w, col.data(), oh, ow);
        MapRM<T> ym(y.image(i), out_c_, cols);
        ym.noalias() = wm * ConstMapRM<T>(col.data(), rows, cols);
        if (has_bias_) ym.colwise() += ConstVecMap<T>(b_.data(), out_c_);
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const int oh = dy.h, ow = dy.w;
    const Eigen::Index cols = static_cast<Eigen::Index>(oh) * ow;
    const Eigen::Index rows = static_cast<Eigen::Index>(in_c_) * k_ * k_;
    Tensor<T> dx(x_.n, x_.c, x_.h, x_.w);
    ConstMapRM<T> wm(w_.data(), out_c_, rows);

    const int nt = thread_count();
    std::vector<std::vector<T>> dw_tls(static_cast<std::size_t>(nt),
                                       std::vector<T>(w_.size(), T(0)));
    std::vector<std::vector<T>> db_tls(static_cast<std::size_t>(nt),
                                       std::vector<T>(b_.size(), T(0)));
#pragma omp parallel
    {
      std::vector<T> col(static_cast<std::size_t>(rows) * cols);
      std::vector<T> dcol(static_cast<std::size_t>(rows) * cols);
      const int tid = this_thread();
      MapRM<T> dw_local(dw_tls[static_cast<std::size_t>(tid)].data(), out_c_, rows);
#pragma omp for schedule(static)
      for (int i = 0; i < x_.n; ++i) {
        ConstMapRM<T> dym(dy.image(i), out_c_, cols);
        im2col(x_.image(i), x_.h, x_.w, col.data(), oh, ow);
        dw_local.noalias() += dym * ConstMapRM<T>(col.data(), rows, cols).transpose();
        if (has_bias_) {
          VecMap<T>(db_tls[static_cast<std::size_t>(tid)].data(), out_c_) +=
              dym.rowwise().sum();
        }
        MapRM<T> dcolm(dcol.data(), rows, cols);
        dcolm.noalias() = wm.transpose() * dym;
        col2im(dcol.data(), dx.image(i), x_.h, x_.w, oh, ow);
      }
    }
    // fixed reduction order keeps training bit-reproducible for a given
    // thread count
    for (int t = 0; t < nt; ++t) {
      VecMap<T>(dw_.data(), static_cast<Eigen::Index>(dw_.size())) +=
          ConstVecMap<T>(dw_tls[static_cast<std::size_t>(t)].data(),
                         static_cast<Eigen::Index>(dw_.size()));
      if (has_bias_) {
        VecMap<T>(db_.data(), static_cast<Eigen::Index>(db_.size())) +=
            ConstVecMap<T>(db_tls[static_cast<std::size_t>(t)].data(),
                           static_cast<Eigen::Index>(db_.size()));
      }
    }
    return dx;
  }

  void collect(ParamRegistry<T>& reg) override {
    reg.add("w", &w_, &dw_, fan_in());
    if (has_bias_) reg.add("b", &b_, &db_);
  }
  const char* kind() const override { return "conv"; }

  int out_dim(int in) const { return (in + 2 * pad_ - k_) / stride_ + 1; }
  std::size_t fan_in() const { return static_cast<std::size_t>(in_c_) * k_ * k_; }
  std::vector<T>& weights() { return w_; }
  std::vector<T>& bias() { return b_; }

 private:
  void require_input(const Tensor<T>& x) const {
    if (x.c != in_c_) {
      throw std::invalid_argument("conv: expected " + std::to_string(in_c_) +
                                  " input channels, got " + x.shape_str());
    }
  }

  void im2col(const T* x, int h, int w, T* col, int oh, int ow) const {
    for (int ci = 0; ci < in_c_; ++ci) {
      const T* src_plane = x + static_cast<std::size_t>(ci) * h * w;
      for (int ki = 0; ki < k_; ++ki) {
        for (int kj = 0; kj < k_; ++kj) {
          T* dst = col + (static_cast<std::size_t>(ci) * k_ * k_ +
                          static_cast<std::size_t>(ki) * k_ + kj) *
                             (static_cast<std::size_t>(oh) * ow);
          for (int oi = 0; oi < oh; ++oi) {
            const int ir = oi * stride_ - pad_ + ki;
            T* drow = dst + static_cast<std::size_t>(oi) * ow;
            if (ir < 0 || ir >= h) {
              std::fill(drow, drow + ow, T(0));
              continue;
            }
            const T* srow = src_plane + static_cast<std::size_t>(ir) * w;
            if (stride_ == 1) {
              const int lo = std::max(0, pad_ - kj);
              const int hi = std::min(ow, w + pad_ - kj);
              std::fill(drow, drow + lo, T(0));
              if (hi > lo) std::copy(srow + lo - pad_ + kj, srow + hi - pad_ + kj, drow + lo);
              std::fill(drow + std::max(lo, hi), drow + ow, T(0));
            } else {
              for (int oj = 0; oj < ow; ++oj) {
                const int ic = oj * stride_ - pad_ + kj;
                drow[oj] = (ic >= 0 && ic < w) ? srow[ic] : T(0);
              }
            }
          }
        }
      }
    }
  }

  void col2im(const T* col, T* x, int h, int w, int oh, int ow) const {
    for (int ci = 0; ci < in_c_; ++ci) {
      T* dst_plane = x + static_cast<std::size_t>(ci) * h * w;
      for (int ki = 0; ki < k_; ++ki) {
        for (int kj = 0; kj < k_; ++kj) {
          const T* src = col + (static_cast<std::size_t>(ci) * k_ * k_ +
                                static_cast<std::size_t>(ki) * k_ + kj) *
                                   (static_cast<std::size_t>(oh) * ow);
          for (int oi = 0; oi < oh; ++oi) {
            const int ir = oi * stride_ - pad_ + ki;
            if (ir < 0 || ir >= h) continue;
            const T* srow = src + static_cast<std::size_t>(oi) * ow;
            T* drow = dst_plane + static_cast<std::size_t>(ir) * w;
            for (int oj = 0; oj < ow; ++oj) {
              const int ic = oj * stride_ - pad_ + kj;
              if (ic >= 0 && ic < w) drow[ic] += srow[oj];
            }
          }
        }
      }
    }
  }

  int in_c_, out_c_, k_, stride_, pad_;
  bool has_bias_;
  std::vector<T> w_, dw_, b_, db_;
  Tensor<T> x_;
};

// ---------------------------------------------------------------------------
// Batch normalization (2d; fully-connected activations use h = w = 1)
// ---------------------------------------------------------------------------

template <class T>
class BatchNorm : public Layer<T> {
 public:
  explicit BatchNorm(int channels, double momentum = 0.1, double eps = 1e-5)
      : c_(channels), momentum_(momentum), eps_(eps),
        gamma_(static_cast<std::size_t>(channels), T(1)),
        beta_(static_cast<std::size_t>(channels), T(0)),
        dgamma_(gamma_.size(), T(0)), dbeta_(beta_.size(), T(0)),
        running_mean_(gamma_.size(), T(0)), running_var_(gamma_.size(), T(1)) {}

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
    if (x.c != c_) {
      throw std::invalid_argument("batchnorm: expected " + std::to_string(c_) +
                                  " channels, got " + x.shape_str());
    }
    train_pass_ = mode == Mode::train;
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    const double m = static_cast<double>(x.n) * static_cast<double>(plane);
    Tensor<T> y(x.n, x.c, x.h, x.w);
    mean_.assign(static_cast<std::size_t>(c_), T(0));
    invstd_.assign(static_cast<std::size_t>(c_), T(0));

    if (train_pass_) {
      for (int ch = 0; ch < c_; ++ch) {
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < x.n; ++i) {
          const T* p = x.image(i) + plane * static_cast<std::size_t>(ch);
          for (std::size_t j = 0; j < plane; ++j) {
            sum += static_cast<double>(p[j]);
            sumsq += static_cast<double>(p[j]) * static_cast<double>(p[j]);
          }
        }
        const double mu = sum / m;
        const double var = std::max(0.0, sumsq / m - mu * mu);
        mean_[static_cast<std::size_t>(ch)] = static_cast<T>(mu);
        invstd_[static_cast<std::size_t>(ch)] = static_cast<T>(1.0 / std::sqrt(var + eps_));
        const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
        auto& rm = running_mean_[static_cast<std::size_t>(ch)];
        auto& rv = running_var_[static_cast<std::size_t>(ch)];
        rm = static_cast<T>((1.0 - momentum_) * rm + momentum_ * mu);
        rv = static_cast<T>((1.0 - momentum_) * rv + momentum_ * unbiased);
      }
    } else {
      for (int ch = 0; ch < c_; ++ch) {
        mean_[static_cast<std::size_t>(ch)] = running_mean_[static_cast<std::size_t>(ch)];
        invstd_[static_cast<std::size_t>(ch)] = static_cast<T>(
            1.0 / std::sqrt(static_cast<double>(running_var_[static_cast<std::size_t>(ch)]) + eps_));
      }
    }

    xhat_ = Tensor<T>(x.n, x.c, x.h, x.w);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x.n; ++i) {
      for (int ch = 0; ch < c_; ++ch) {
        const T mu = mean_[static_cast<std::size_t>(ch)];
        const T is = invstd_[static_cast<std::size_t>(ch)];
        const T g = gamma_[static_cast<std::size_t>(ch)];
        const T b = beta_[static_cast<std::size_t>(ch)];
        const T* px = x.image(i) + plane * static_cast<std::size_t>(ch);
        T* ph = xhat_.image(i) + plane * static_cast<std::size_t>(ch);
        T* py = y.image(i) + plane * static_cast<std::size_t>(ch);
        for (std::size_t j = 0; j < plane; ++j) {
          ph[j] = (px[j] - mu) * is;
          py[j] = g * ph[j] + b;
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const std::size_t plane = static_cast<std::size_t>(dy.h) * dy.w;
    const double m = static_cast<double>(dy.n) * static_cast<double>(plane);
    Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);

    std::vector<double> sum_dy(static_cast<std::size_t>(c_), 0.0);
    std::vector<double> sum_dy_xhat(static_cast<std::size_t>(c_), 0.0);
    for (int i = 0; i < dy.n; ++i) {
      for (int ch = 0; ch < c_; ++ch) {
        const T* pd = dy.image(i) + plane * static_cast<std::size_t>(ch);
        const T* ph = xhat_.image(i) + plane * static_cast<std::size_t>(ch);
        double s = 0.0, sh = 0.0;
        for (std::size_t j = 0; j < plane; ++j) {
          s += static_cast<double>(pd[j]);
          sh += static_cast<double>(pd[j]) * static_cast<double>(ph[j]);
        }
        sum_dy[static_cast<std::size_t>(ch)] += s;
        sum_dy_xhat[static_cast<std::size_t>(ch)] += sh;
      }
    }
    for (int ch = 0; ch < c_; ++ch) {
      dbeta_[static_cast<std::size_t>(ch)] += static_cast<T>(sum_dy[static_cast<std::size_t>(ch)]);
      dgamma_[static_cast<std::size_t>(ch)] +=
          static_cast<T>(sum_dy_xhat[static_cast<std::size_t>(ch)]);
    }

#pragma omp parallel for schedule(static)
    for (int i = 0; i < dy.n; ++i) {
      for (int ch = 0; ch < c_; ++ch) {
        const double g = static_cast<double>(gamma_[static_cast<std::size_t>(ch)]);
        const double is = static_cast<double>(invstd_[static_cast<std::size_t>(ch)]);
        const T* pd = dy.image(i) + plane * static_cast<std::size_t>(ch);
        const T* ph = xhat_.image(i) + plane * static_cast<std::size_t>(ch);
        T* px = dx.image(i) + plane * static_cast<std::size_t>(ch);
        if (train_pass_) {
          const double mean_dy = sum_dy[static_cast<std::size_t>(ch)] / m;
          const double mean_dy_xhat = sum_dy_xhat[static_cast<std::size_t>(ch)] / m;
          for (std::size_t j = 0; j < plane; ++j) {
            px[j] = static_cast<T>(
                g * is *
                (static_cast<double>(pd[j]) - mean_dy - static_cast<double>(ph[j]) * mean_dy_xhat));
          }
        } else {
          for (std::size_t j = 0; j < plane; ++j) {
            px[j] = static_cast<T>(g * is * static_cast<double>(pd[j]));
          }
        }
      }
    }
    return dx;
  }

  void collect(ParamRegistry<T>& reg) override {
    reg.add("gamma", &gamma_, &dgamma_);
    reg.add("beta", &beta_, &dbeta_);
    reg.add_stat("running_mean", &running_mean_);
    reg.add_stat("running_var", &running_var_);
  }
  const char* kind() const override { return "batchnorm"; }

 private:
  int c_;
  double momentum_, eps_;
  std::vector<T> gamma_, beta_, dgamma_, dbeta_, running_mean_, running_var_;
  std::vector<T> mean_, invstd_;
  Tensor<T> xhat_;
  bool train_pass_ = true;
};

// ---------------------------------------------------------------------------
// Activations and pooling
// ---------------------------------------------------------------------------

template <class T>
class ReLU : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    y_ = x;
    for (auto& v : y_.v) v = v > T(0) ? v : T(0);
    return y_;
  }
  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> dx = dy;
    for (std::size_t i = 0; i < dx.v.size(); ++i) {
      if (y_.v[i] <= T(0)) dx.v[i] = T(0);
    }
    return dx;
  }
  const char* kind() const override { return "relu"; }

 private:
  Tensor<T> y_;
};

template <class T>
class MaxPool : public Layer<T> {
 public:
  MaxPool(int k, int stride, int pad = 0) : k_(k), stride_(stride), pad_(pad) {}

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    in_h_ = x.h;
    in_w_ = x.w;
    const int oh = (x.h + 2 * pad_ - k_) / stride_ + 1;
    const int ow = (x.w + 2 * pad_ - k_) / stride_ + 1;
    Tensor<T> y(x.n, x.c, oh, ow);
    argmax_.assign(y.size(), 0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x.n; ++i) {
      for (int ch = 0; ch < x.c; ++ch) {
        const T* plane = x.image(i) + static_cast<std::size_t>(ch) * x.h * x.w;
        T* out = y.image(i) + static_cast<std::size_t>(ch) * oh * ow;
        std::size_t base = (static_cast<std::size_t>(i) * x.c + static_cast<std::size_t>(ch)) *
                           (static_cast<std::size_t>(oh) * ow);
        for (int oi = 0; oi < oh; ++oi) {
          for (int oj = 0; oj < ow; ++oj) {
            T best = std::numeric_limits<T>::lowest();
            int best_idx = -1;
            for (int ki = 0; ki < k_; ++ki) {
              const int ir = oi * stride_ - pad_ + ki;
              if (ir < 0 || ir >= x.h) continue;
              for (int kj = 0; kj < k_; ++kj) {
                const int ic = oj * stride_ - pad_ + kj;
                if (ic < 0 || ic >= x.w) continue;
                const T v = plane[static_cast<std::size_t>(ir) * x.w + ic];
                if (best_idx < 0 || v > best) {
                  best = v;
                  best_idx = ir * x.w + ic;
                }
              }
            }
            out[static_cast<std::size_t>(oi) * ow + oj] = best_idx < 0 ? T(0) : best;
            argmax_[base + static_cast<std::size_t>(oi) * ow + oj] = best_idx;
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> dx(dy.n, dy.c, in_h_, in_w_);
    const std::size_t plane_out = static_cast<std::size_t>(dy.h) * dy.w;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < dy.n; ++i) {
      for (int ch = 0; ch < dy.c; ++ch) {
        const T* src = dy.image(i) + static_cast<std::size_t>(ch) * plane_out;
        T* dst = dx.image(i) + static_cast<std::size_t>(ch) * in_h_ * in_w_;
        const std::size_t base =
            (static_cast<std::size_t>(i) * dy.c + static_cast<std::size_t>(ch)) * plane_out;
        for (std::size_t j = 0; j < plane_out; ++j) {
          const int idx = argmax_[base + j];
          if (idx >= 0) dst[idx] += src[j];
        }
      }
    }
    return dx;
  }
  const char* kind() const override { return "maxpool"; }

 private:
  int k_, stride_, pad_;
  int in_h_ = 0, in_w_ = 0;
  std::vector<int> argmax_;
};

template <class T>
class AvgPool : public Layer<T> {
 public:
  AvgPool(int k, int stride, int pad = 0) : k_(k), stride_(stride), pad_(pad) {}

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    in_h_ = x.h;
    in_w_ = x.w;
    const int oh = (x.h + 2 * pad_ - k_) / stride_ + 1;
    const int ow = (x.w + 2 * pad_ - k_) / stride_ + 1;
    Tensor<T> y(x.n, x.c, oh, ow);
    const T scale = T(1) / static_cast<T>(k_ * k_);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x.n; ++i) {
      for (int ch = 0; ch < x.c; ++ch) {
        const T* plane = x.image(i) + static_cast<std::size_t>(ch) * x.h * x.w;
        T* out = y.image(i) + static_cast<std::size_t>(ch) * oh * ow;
        for (int oi = 0; oi < oh; ++oi) {
          for (int oj = 0; oj < ow; ++oj) {
            T acc = T(0);
            for (int ki = 0; ki < k_; ++ki) {
              const int ir = oi * stride_ - pad_ + ki;
              if (ir < 0 || ir >= x.h) continue;
              for (int kj = 0; kj < k_; ++kj) {
                const int ic = oj * stride_ - pad_ + kj;
                if (ic < 0 || ic >= x.w) continue;
                acc += plane[static_cast<std::size_t>(ir) * x.w + ic];
              }
            }
            out[static_cast<std::size_t>(oi) * ow + oj] = acc * scale;
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> dx(dy.n, dy.c, in_h_, in_w_);
    const T scale = T(1) / static_cast<T>(k_ * k_);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < dy.n; ++i) {
      for (int ch = 0; ch < dy.c; ++ch) {
        const T* src = dy.image(i) + static_cast<std::size_t>(ch) * dy.h * dy.w;
        T* dst = dx.image(i) + static_cast<std::size_t>(ch) * in_h_ * in_w_;
        for (int oi = 0; oi < dy.h; ++oi) {
          for (int oj = 0; oj < dy.w; ++oj) {
            const T g = src[static_cast<std::size_t>(oi) * dy.w + oj] * scale;
            for (int ki = 0; ki < k_; ++ki) {
              const int ir = oi * stride_ - pad_ + ki;
              if (ir < 0 || ir >= in_h_) continue;
              for (int kj = 0; kj < k_; ++kj) {
                const int ic = oj * stride_ - pad_ + kj;
                if (ic < 0 || ic >= in_w_) continue;
                dst[static_cast<std::size_t>(ir) * in_w_ + ic] += g;
              }
            }
          }
        }
      }
    }
    return dx;
  }
  const char* kind() const override { return "avgpool"; }

 private:
  int k_, stride_, pad_;
  int in_h_ = 0, in_w_ = 0;
};

template <class T>
class GlobalAvgPool : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    in_h_ = x.h;
    in_w_ = x.w;
    Tensor<T> y(x.n, x.c, 1, 1);
    const T scale = T(1) / static_cast<T>(x.h * x.w);
    for (int i = 0; i < x.n; ++i) {
      ConstMapRM<T> xm = x.image_mat(i);
      MapRM<T> ym(y.image(i), x.c, 1);
      ym.noalias() = xm.rowwise().sum() * scale;
    }
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> dx(dy.n, dy.c, in_h_, in_w_);
    const T scale = T(1) / static_cast<T>(in_h_ * in_w_);
    for (int i = 0; i < dy.n; ++i) {
      MapRM<T> dxm = dx.image_mat(i);
      ConstMapRM<T> dym(dy.image(i), dy.c, 1);
      dxm.colwise() = dym.col(0) * scale;
    }
    return dx;
  }
  const char* kind() const override { return "gap"; }

 private:
  int in_h_ = 0, in_w_ = 0;
};

// ---------------------------------------------------------------------------
// Fully connected
// ---------------------------------------------------------------------------

template <class T>
class Dense : public Layer<T> {
 public:
  Dense(int in_f, int out_f, bool bias = true)
      : in_f_(in_f), out_f_(out_f), has_bias_(bias),
        w_(static_cast<std::size_t>(out_f) * in_f, T(0)), dw_(w_.size(), T(0)),
        b_(bias ? static_cast<std::size_t>(out_f) : 0, T(0)), db_(b_.size(), T(0)) {}

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    if (static_cast<int>(x.per_image()) != in_f_) {
      throw std::invalid_argument("dense: expected " + std::to_string(in_f_) +
                                  " features, got " + x.shape_str());
    }
    x_ = x;
    Tensor<T> y(x.n, out_f_, 1, 1);
    ConstMapRM<T> xm(x.v.data(), x.n, in_f_);
    ConstMapRM<T> wm(w_.data(), out_f_, in_f_);
    MapRM<T> ym(y.v.data(), y.n, out_f_);
    ym.noalias() = xm * wm.transpose();
    if (has_bias_) ym.rowwise() += ConstVecMap<T>(b_.data(), out_f_).transpose();
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    ConstMapRM<T> dym(dy.v.data(), dy.n, out_f_);
    ConstMapRM<T> xm(x_.v.data(), x_.n, in_f_);
    ConstMapRM<T> wm(w_.data(), out_f_, in_f_);
    MapRM<T>(dw_.data(), out_f_, in_f_).noalias() += dym.transpose() * xm;
    if (has_bias_) {
      VecMap<T>(db_.data(), out_f_) += dym.colwise().sum().transpose();
    }
    Tensor<T> dx(x_.n, x_.c, x_.h, x_.w);
    MapRM<T>(dx.v.data(), x_.n, in_f_).noalias() = dym * wm;
    return dx;
  }

  void collect(ParamRegistry<T>& reg) override {
    reg.add("w", &w_, &dw_, static_cast<std::size_t>(in_f_));
    if (has_bias_) reg.add("b", &b_, &db_);
  }
  const char* kind() const override { return "dense"; }

  std::vector<T>& weights() { return w_; }
  std::vector<T>& bias() { return b_; }

 private:
  int in_f_, out_f_;
  bool has_bias_;
  std::vector<T> w_, dw_, b_, db_;
  Tensor<T> x_;
};

// ---------------------------------------------------------------------------
// Composites
// ---------------------------------------------------------------------------

template <class T>
class Sequential : public Layer<T> {
 public:
  Sequential() = default;

  template <class L>
  L* add(const std::string& name, std::unique_ptr<L> layer) {
    L* raw = layer.get();
    names_.push_back(name);
    children_.push_back(std::move(layer));
    return raw;
  }

  template <class L, class... Args>
  L* emplace(const std::string& name, Args&&... args) {
    return add(name, std::make_unique<L>(std::forward<Args>(args)...));
  }

  bool empty() const { return children_.empty(); }
  std::size_t child_count() const { return children_.size(); }
  Layer<T>* child(std::size_t i) { return children_[i].get(); }
  const std::string& child_name(std::size_t i) const { return names_[i]; }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
    Tensor<T> cur = x;
    for (auto& layer : children_) cur = layer->forward(cur, mode);
    return cur;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> cur = dy;
    for (auto it = children_.rbegin(); it != children_.rend(); ++it) {
      cur = (*it)->backward(cur);
    }
    return cur;
  }

  void collect(ParamRegistry<T>& reg) override {
    for (std::size_t i = 0; i < children_.size(); ++i) {
      reg.push(names_[i]);
      children_[i]->collect(reg);
      reg.pop();
    }
  }
  const char* kind() const override { return "sequential"; }

 private:
  std::vector<std::string> names_;
  std::vector<std::unique_ptr<Layer<T>>> children_;
};

/// y = main(x) + shortcut(x); an empty shortcut is the identity.
template <class T>
class Residual : public Layer<T> {
 public:
  Residual(std::unique_ptr<Sequential<T>> main, std::unique_ptr<Sequential<T>> shortcut)
      : main_(std::move(main)), shortcut_(std::move(shortcut)) {}

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
    Tensor<T> y = main_->forward(x, mode);
    Tensor<T> s = shortcut_ && !shortcut_->empty() ? shortcut_->forward(x, mode) : x;
    if (!y.same_shape(s)) {
      throw std::invalid_argument("residual: branch shapes differ: " + y.shape_str() +
                                  " vs " + s.shape_str());
    }
    VecMap<T>(y.v.data(), static_cast<Eigen::Index>(y.v.size())) +=
        ConstVecMap<T>(s.v.data(), static_cast<Eigen::Index>(s.v.size()));
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> dx = main_->backward(dy);
    Tensor<T> ds = shortcut_ && !shortcut_->empty() ? shortcut_->backward(dy) : dy;
    VecMap<T>(dx.v.data(), static_cast<Eigen::Index>(dx.v.size())) +=
        ConstVecMap<T>(ds.v.data(), static_cast<Eigen::Index>(ds.v.size()));
    return dx;
  }

  void collect(ParamRegistry<T>& reg) override {
    reg.push("main");
    main_->collect(reg);
    reg.pop();
    if (shortcut_ && !shortcut_->empty()) {
      reg.push("shortcut");
      shortcut_->collect(reg);
      reg.pop();
    }
  }
  const char* kind() const override { return "residual"; }

 private:
  std::unique_ptr<Sequential<T>> main_;
  std::unique_ptr<Sequential<T>> shortcut_;
};

/// y = concat(x, f(x)) along channels; the dense-connectivity building block.
template <class T>
class DenseUnit : public Layer<T> {
 public:
  explicit DenseUnit(std::unique_ptr<Sequential<T>> branch) : branch_(std::move(branch)) {}

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
    in_c_ = x.c;
    Tensor<T> g = branch_->forward(x, mode);
    if (g.h != x.h || g.w != x.w || g.n != x.n) {
      throw std::invalid_argument("dense unit: branch changed spatial shape");
    }
    Tensor<T> y(x.n, x.c + g.c, x.h, x.w);
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int i = 0; i < x.n; ++i) {
      std::copy(x.image(i), x.image(i) + plane * static_cast<std::size_t>(x.c), y.image(i));
      std::copy(g.image(i), g.image(i) + plane * static_cast<std::size_t>(g.c),
                y.image(i) + plane * static_cast<std::size_t>(x.c));
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const int g_c = dy.c - in_c_;
    const std::size_t plane = static_cast<std::size_t>(dy.h) * dy.w;
    Tensor<T> dg(dy.n, g_c, dy.h, dy.w);
    Tensor<T> dx(dy.n, in_c_, dy.h, dy.w);
    for (int i = 0; i < dy.n; ++i) {
      std::copy(dy.image(i), dy.image(i) + plane * static_cast<std::size_t>(in_c_), dx.image(i));
      std::copy(dy.image(i) + plane * static_cast<std::size_t>(in_c_),
                dy.image(i) + plane * static_cast<std::size_t>(dy.c), dg.image(i));
    }
    Tensor<T> dxb = branch_->backward(dg);
    VecMap<T>(dx.v.data(), static_cast<Eigen::Index>(dx.v.size())) +=
        ConstVecMap<T>(dxb.v.data(), static_cast<Eigen::Index>(dxb.v.size()));
    return dx;
  }

  void collect(ParamRegistry<T>& reg) override {
    reg.push("branch");
    branch_->collect(reg);
    reg.pop();
  }
  const char* kind() const override { return "denseunit"; }

 private:
  std::unique_ptr<Sequential<T>> branch_;
  int in_c_ = 0;
};

}  // namespace geopretext
