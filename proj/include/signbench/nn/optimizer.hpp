#ifndef SIGNBENCH_NN_OPTIMIZER_HPP
#define SIGNBENCH_NN_OPTIMIZER_HPP

#include <cmath>
#include <vector>

#include "signbench/tensor.hpp"

namespace signbench {

struct AdamConfig {
  double learning_rate = 0.0002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Holds first/second moment tensors per
/// parameter; the step counter increments exactly once per apply().
template <typename T>
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  std::size_t step_count() const { return t_; }

  void apply(const std::vector<Tensor<T>*>& params, const std::vector<Tensor<T>*>& grads) {
    if (params.size() != grads.size()) throw Error("adam: params/grads count mismatch");
    if (m_.empty()) {
      for (auto* p : params) {
        m_.emplace_back(p->shape());
        v_.emplace_back(p->shape());
      }
    }
    if (m_.size() != params.size()) throw Error("adam: parameter set changed between steps");
    ++t_;
    const T b1 = static_cast<T>(cfg_.beta1);
    const T b2 = static_cast<T>(cfg_.beta2);
    const T corr1 = static_cast<T>(1.0 - std::pow(cfg_.beta1, double(t_)));
    const T corr2 = static_cast<T>(1.0 - std::pow(cfg_.beta2, double(t_)));
    const T lr = static_cast<T>(cfg_.learning_rate);
    const T eps = static_cast<T>(cfg_.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor<T>& p = *params[i];
      const Tensor<T>& g = *grads[i];
      if (!p.same_shape(g) || !p.same_shape(m_[i]))
        throw Error("adam: shape mismatch between parameter and gradient");
      Tensor<T>& m = m_[i];
      Tensor<T>& v = v_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = b1 * m[j] + (T(1) - b1) * g[j];
        v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
        T mhat = m[j] / corr1;
        T vhat = v[j] / corr2;
        p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  const std::vector<Tensor<T>>& first_moments() const { return m_; }
  const std::vector<Tensor<T>>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace signbench

#endif  // SIGNBENCH_NN_OPTIMIZER_HPP
