#ifndef SIGNBENCH_NN_LOSS_HPP
#define SIGNBENCH_NN_LOSS_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "signbench/tensor.hpp"

namespace signbench {

/// Mean softmax cross-entropy over a batch of logits, via the log-sum-exp
/// stable form, plus the gradient (softmax - one_hot) / N.
template <typename T>
std::pair<double, Tensor<T>> softmax_cross_entropy(const Tensor<T>& logits,
                                                   const std::vector<int>& labels) {
  if (logits.rank() != 2)
    throw Error("softmax_cross_entropy expects N×C logits, got " + shape_str(logits.shape()));
  std::size_t n = logits.dim(0), c = logits.dim(1);
  if (labels.size() != n) throw Error("softmax_cross_entropy: labels/logits misaligned");

  Tensor<T> grad(logits.shape());
  double loss = 0.0;
  const T inv_n = T(1) / static_cast<T>(n);
  for (std::size_t i = 0; i < n; ++i) {
    int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c)
      throw Error("label " + std::to_string(label) + " out of range for " + std::to_string(c) +
                  " classes");
    const T* row = logits.data() + i * c;
    T* g = grad.data() + i * c;
    T mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      g[j] = std::exp(row[j] - mx);
      total += static_cast<double>(g[j]);
    }
    loss += std::log(total) - static_cast<double>(row[label] - mx);
    T inv_total = static_cast<T>(1.0 / total);
    for (std::size_t j = 0; j < c; ++j) g[j] *= inv_total * inv_n;
    g[label] -= inv_n;
  }
  return {loss / static_cast<double>(n), std::move(grad)};
}

}  // namespace signbench

#endif  // SIGNBENCH_NN_LOSS_HPP
