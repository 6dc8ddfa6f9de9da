#ifndef SIGNBENCH_NN_ACTIVATIONS_HPP
#define SIGNBENCH_NN_ACTIVATIONS_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "signbench/tensor.hpp"

namespace signbench {

enum class ActivationKind { relu, swish, mish, softmax };

inline std::string activation_name(ActivationKind k) {
  switch (k) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::swish: return "swish";
    case ActivationKind::mish: return "mish";
    case ActivationKind::softmax: return "softmax";
  }
  return "?";
}

inline ActivationKind parse_activation(const std::string& s) {
  if (s == "relu") return ActivationKind::relu;
  if (s == "swish") return ActivationKind::swish;
  if (s == "mish") return ActivationKind::mish;
  if (s == "softmax") return ActivationKind::softmax;
  throw ConfigError("unknown activation '" + s + "'");
}

namespace act {

/// Polynomial exp for the standard-precision (float) path: Cephes-style
/// 2^k * p(r) split, ~2 ulp over the clamped range, branch-free so the
/// activation loops vectorise. The wide-precision (double) path keeps
/// std::exp, which the finite-difference checks rely on.
inline float exp_t(float x) {
  x = std::min(88.0f, std::max(-87.0f, x));
  float k = std::floor(1.442695040f * x + 0.5f);
  float r = x - k * 0.693359375f - k * -2.12194440e-4f;
  float p = 1.9875691500e-4f;
  p = p * r + 1.3981999507e-3f;
  p = p * r + 8.3334519073e-3f;
  p = p * r + 4.1665795894e-2f;
  p = p * r + 1.6666665459e-1f;
  p = p * r + 5.0000001201e-1f;
  p = p * r * r + r + 1.0f;
  return p * std::bit_cast<float>((static_cast<std::int32_t>(k) + 127) << 23);
}

inline double exp_t(double x) { return std::exp(x); }

template <typename T>
inline T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + exp_t(-x));
  T e = exp_t(x);
  return e / (T(1) + e);
}

/// Overflow-safe softplus: identity above 30, log1p(exp(x)) below.
template <typename T>
inline T softplus(T x) {
  if (x > T(30)) return x;
  return std::log1p(std::exp(x));
}

/// mish(x) = x * tanh(softplus(x)), evaluated with a single exp via
/// tanh(ln u) = (u^2 - 1) / (u^2 + 1) for u = 1 + e^x. Above 30 softplus
/// is the identity and tanh saturates, so mish(x) = x there (and u^2 would
/// overflow single precision anyway). Value and derivative share the exp.
template <typename T>
inline T mish_with_grad(T x, T& grad) {
  T xc = std::min(x, T(30));
  T e = exp_t(xc);
  T u = T(1) + e;
  T u2 = u * u;
  T tsp = (u2 - T(1)) / (u2 + T(1));
  T sig = e / u;
  grad = x > T(30) ? T(1) : tsp + x * (T(1) - tsp * tsp) * sig;
  return x > T(30) ? x : x * tsp;
}

template <typename T>
inline T mish(T x) {
  T g;
  return mish_with_grad(x, g);
}

template <typename T>
inline T swish(T x) {
  return x * sigmoid(x);
}

template <typename T>
inline T swish_grad(T x) {
  T s = sigmoid(x);
  return s * (T(1) + x * (T(1) - s));
}

}  // namespace act

/// Pointwise activation (relu / swish / mish). `deriv`, when non-null, is
/// filled with dy/dx for the backward pass. softmax is row-wise over the
/// last axis and has its own backward; see ActivationLayer.
template <typename T>
Tensor<T> activation_forward(ActivationKind kind, const Tensor<T>& x, Tensor<T>* deriv = nullptr) {
  if (kind == ActivationKind::softmax) {
    if (x.rank() != 2) throw Error("softmax expects N×C logits, got " + shape_str(x.shape()));
    std::size_t n = x.dim(0), c = x.dim(1);
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < n; ++i) {
      const T* row = x.data() + i * c;
      T* out = y.data() + i * c;
      T mx = row[0];
      for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
      T total = T(0);
      for (std::size_t j = 0; j < c; ++j) {
        out[j] = std::exp(row[j] - mx);
        total += out[j];
      }
      T inv = T(1) / total;
      for (std::size_t j = 0; j < c; ++j) out[j] *= inv;
    }
    return y;
  }

  Tensor<T> y(x.shape());
  if (deriv && !deriv->same_shape(x)) *deriv = Tensor<T>(x.shape());
  const T* px = x.data();
  T* py = y.data();
  T* pd = deriv ? deriv->data() : nullptr;
  parallel_for(0, x.size(), 65536, [&](std::size_t lo, std::size_t hi) {
    switch (kind) {
      case ActivationKind::relu:
        for (std::size_t i = lo; i < hi; ++i) {
          py[i] = px[i] > T(0) ? px[i] : T(0);
          if (pd) pd[i] = px[i] > T(0) ? T(1) : T(0);
        }
        break;
      case ActivationKind::swish:
        for (std::size_t i = lo; i < hi; ++i) {
          py[i] = act::swish(px[i]);
          if (pd) pd[i] = act::swish_grad(px[i]);
        }
        break;
      case ActivationKind::mish:
        if (pd) {
          for (std::size_t i = lo; i < hi; ++i) py[i] = act::mish_with_grad(px[i], pd[i]);
        } else {
          for (std::size_t i = lo; i < hi; ++i) py[i] = act::mish(px[i]);
        }
        break;
      case ActivationKind::softmax:
        break;  // handled above
    }
  });
  return y;
}

}  // namespace signbench

#endif  // SIGNBENCH_NN_ACTIVATIONS_HPP
