#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "geopretext/tensor.hpp"

namespace geopretext {

/// Probability floor inside the log; keeps the loss finite for collapsed
/// predictions instead of throwing.
inline constexpr double kLogFloor = 1e-12;

/// Row-wise softmax of (n, K) logits, numerically stabilized.
template <class T>
MatRM<T> softmax_rows(const ConstMapRM<T>& logits) {
  MatRM<T> probs = logits;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    auto row = probs.row(i);
    const T mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
  return probs;
}

template <class T>
MatRM<T> softmax_logits(const Tensor<T>& logits) {
  return softmax_rows<T>(ConstMapRM<T>(logits.v.data(), logits.n,
                                       static_cast<Eigen::Index>(logits.per_image())));
}

/// Mean negative log-probability of the true transform over the batch. With
/// all K copies of a source image co-batched this equals the per-source
/// average -(1/K) sum_y log F^y, averaged over sources.
template <class T, class Mat>
double pretext_loss(const Mat& probs, const std::vector<int>& labels, int K) {
  if (probs.cols() != K) {
    throw std::invalid_argument("pretext_loss: probability rows must have K columns");
  }
  if (static_cast<std::size_t>(probs.rows()) != labels.size()) {
    throw std::invalid_argument("pretext_loss: label count != batch size");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= K) throw std::invalid_argument("pretext_loss: label out of range");
    total -= std::log(std::max(static_cast<double>(probs(i, y)), kLogFloor));
  }
  return total / static_cast<double>(probs.rows());
}

/// d(loss)/d(logits) for mean cross-entropy over the batch.
template <class T>
Tensor<T> cross_entropy_backward(const MatRM<T>& probs, const std::vector<int>& labels) {
  Tensor<T> dlogits(static_cast<int>(probs.rows()), static_cast<int>(probs.cols()), 1, 1);
  MapRM<T> dm(dlogits.v.data(), probs.rows(), probs.cols());
  dm = probs / static_cast<T>(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    dm(i, labels[static_cast<std::size_t>(i)]) -= T(1) / static_cast<T>(probs.rows());
  }
  return dlogits;
}

template <class Mat>
double top1_accuracy(const Mat& probs, const std::vector<int>& labels) {
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index arg = 0;
    probs.row(i).maxCoeff(&arg);
    if (static_cast<int>(arg) == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

}  // namespace geopretext
