#ifndef SIGNBENCH_TENSOR_HPP
#define SIGNBENCH_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "signbench/common.hpp"
#include "signbench/parallel.hpp"

namespace signbench {

/// Dense n-dimensional array, row-major, last axis fastest-varying.
/// Image tensors are channel-last: (batch, height, width, channel).
/// Instantiate with double for gradient-check headroom, float for training.
/// No implicit broadcasting: binary ops require equal shapes or a scalar.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {
    check_shape();
  }

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != shape_numel(shape_))
      throw Error("tensor data length " + std::to_string(data_.size()) +
                  " does not match shape " + shape_str(shape_));
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, T value) { return Tensor(std::move(shape), value); }

  static Tensor from_vector(std::initializer_list<T> values) {
    return Tensor({values.size()}, std::vector<T>(values));
  }

  static Tensor from_matrix(std::initializer_list<std::initializer_list<T>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<T> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw Error("ragged matrix initializer");
      data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  template <typename... Ix>
  T& operator()(Ix... ix) {
    return data_[offset(ix...)];
  }
  template <typename... Ix>
  const T& operator()(Ix... ix) const {
    return data_[offset(ix...)];
  }

  /// Reinterprets the buffer with a new shape of equal element count.
  Tensor reshaped(Shape shape) const {
    if (shape_numel(shape) != data_.size())
      throw Error("reshape from " + shape_str(shape_) + " to " + shape_str(shape) +
                  " changes element count");
    return Tensor(std::move(shape), data_);
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  /// Lossy precision conversion (float <-> double).
  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return Tensor<U>(shape_, std::move(out));
  }

 private:
  template <typename... Ix>
  std::size_t offset(Ix... ix) const {
    constexpr std::size_t n = sizeof...(Ix);
    const std::size_t idx[n] = {static_cast<std::size_t>(ix)...};
    std::size_t off = 0;
    for (std::size_t a = 0; a < n; ++a) off = off * shape_[a] + idx[a];
    return off;
  }

  void check_shape() const {
    for (std::size_t d : shape_)
      if (d == 0) throw Error("tensor dimensions must be positive, got " + shape_str(shape_));
  }

  Shape shape_;
  std::vector<T> data_;
};

enum class EwOp { add, sub, mul, div, min, max };

namespace detail {
template <typename T>
inline T apply_ew(EwOp op, T a, T b) {
  switch (op) {
    case EwOp::add: return a + b;
    case EwOp::sub: return a - b;
    case EwOp::mul: return a * b;
    case EwOp::div: return a / b;
    case EwOp::min: return a < b ? a : b;
    case EwOp::max: return a > b ? a : b;
  }
  return T(0);
}
}  // namespace detail

/// Pointwise op over equal-shape tensors. Shape mismatch is an error that
/// names both shapes; there is no implicit broadcasting.
template <typename T>
Tensor<T> elementwise(EwOp op, const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b))
    throw Error("elementwise shape mismatch: " + shape_str(a.shape()) + " vs " +
                shape_str(b.shape()));
  Tensor<T> out(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* po = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) po[i] = detail::apply_ew(op, pa[i], pb[i]);
  return out;
}

/// Pointwise op against a scalar (the one permitted broadcast).
template <typename T>
Tensor<T> elementwise(EwOp op, const Tensor<T>& a, T scalar) {
  Tensor<T> out(a.shape());
  const T* pa = a.data();
  T* po = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) po[i] = detail::apply_ew(op, pa[i], scalar);
  return out;
}

template <typename T>
Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(EwOp::add, a, b); }
template <typename T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(EwOp::sub, a, b); }
template <typename T>
Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(EwOp::mul, a, b); }
template <typename T>
Tensor<T> operator+(const Tensor<T>& a, T s) { return elementwise(EwOp::add, a, s); }
template <typename T>
Tensor<T> operator-(const Tensor<T>& a, T s) { return elementwise(EwOp::sub, a, s); }
template <typename T>
Tensor<T> operator*(const Tensor<T>& a, T s) { return elementwise(EwOp::mul, a, s); }

// ---------------------------------------------------------------------------
// GEMM. Row blocks run in parallel; within a block the k loop is outermost so
// a B row is reused across the whole block, and every C element accumulates
// in increasing-k order regardless of thread count.
// ---------------------------------------------------------------------------

namespace detail {
constexpr std::size_t kGemmRowGrain = 32;

template <typename T>
void gemm_block(const T* a, const T* b, T* c, std::size_t lo, std::size_t hi,
                std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const T* brow = b + p * n;
    for (std::size_t i = lo; i < hi; ++i) {
      T av = a[i * k + p];
      if (av == T(0)) continue;
      T* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}
}  // namespace detail

/// c(m×n) = a(m×k) · b(k×n), accumulating into c unless zeroed first.
template <typename T>
void gemm(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
          bool zero_c = true) {
  if (zero_c) std::fill(c, c + m * n, T(0));
  parallel_for(0, m, detail::kGemmRowGrain,
               [&](std::size_t lo, std::size_t hi) { detail::gemm_block(a, b, c, lo, hi, k, n); });
}

/// c(k×n) = aᵀ · b for a(m×k), b(m×n). Used for weight gradients.
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
             bool zero_c = true) {
  if (zero_c) std::fill(c, c + k * n, T(0));
  parallel_for(0, k, std::size_t(16), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = 0; i < m; ++i) {
      const T* brow = b + i * n;
      for (std::size_t p = lo; p < hi; ++p) {
        T av = a[i * k + p];
        if (av == T(0)) continue;
        T* crow = c + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  });
}

template <typename T>
Tensor<T> transposed(const Tensor<T>& a) {
  if (a.rank() != 2) throw Error("transpose expects rank-2, got " + shape_str(a.shape()));
  std::size_t m = a.dim(0), n = a.dim(1);
  Tensor<T> out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(j, i) = a(i, j);
  return out;
}

/// Standard matrix product of rank-2 tensors.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw Error("matmul expects rank-2 tensors, got " + shape_str(a.shape()) + " and " +
                shape_str(b.shape()));
  if (a.dim(1) != b.dim(0))
    throw Error("matmul inner dimensions disagree: " + shape_str(a.shape()) + " x " +
                shape_str(b.shape()));
  Tensor<T> c({a.dim(0), b.dim(1)});
  gemm(a.data(), b.data(), c.data(), a.dim(0), a.dim(1), b.dim(1));
  return c;
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

enum class ReduceOp { sum, mean, max, argmax };

namespace detail {
// Views the tensor as outer × axis × inner for a reduction along `axis`.
inline void reduce_strides(const Shape& s, std::size_t axis, std::size_t& outer,
                           std::size_t& len, std::size_t& inner) {
  outer = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= s[a];
  len = s[axis];
  inner = 1;
  for (std::size_t a = axis + 1; a < s.size(); ++a) inner *= s[a];
}
}  // namespace detail

/// Whole-tensor or single-axis reduction. The reduced axis is dropped.
/// argmax returns element indices as values; ties resolve to the lowest
/// index (the global tie rule shared by pooling, clustering and voting).
template <typename T>
Tensor<T> reduce(ReduceOp op, const Tensor<T>& a, std::optional<std::size_t> axis = {}) {
  if (a.empty()) throw Error("reduce of empty tensor");
  if (!axis) {
    const T* p = a.data();
    if (op == ReduceOp::argmax) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < a.size(); ++i)
        if (p[i] > p[best]) best = i;
      return Tensor<T>({1}, {static_cast<T>(best)});
    }
    T acc = op == ReduceOp::max ? p[0] : T(0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (op == ReduceOp::max)
        acc = std::max(acc, p[i]);
      else
        acc += p[i];
    }
    if (op == ReduceOp::mean) acc /= static_cast<T>(a.size());
    return Tensor<T>({1}, {acc});
  }

  if (*axis >= a.rank())
    throw Error("reduce axis " + std::to_string(*axis) + " out of range for " +
                shape_str(a.shape()));
  std::size_t outer, len, inner;
  detail::reduce_strides(a.shape(), *axis, outer, len, inner);
  Shape out_shape;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (i != *axis) out_shape.push_back(a.dim(i));
  if (out_shape.empty()) out_shape.push_back(1);
  Tensor<T> out(out_shape);
  const T* p = a.data();
  T* q = out.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const T* base = p + o * len * inner + in;
      if (op == ReduceOp::argmax) {
        std::size_t best = 0;
        for (std::size_t l = 1; l < len; ++l)
          if (base[l * inner] > base[best * inner]) best = l;
        q[o * inner + in] = static_cast<T>(best);
      } else if (op == ReduceOp::max) {
        T acc = base[0];
        for (std::size_t l = 1; l < len; ++l) acc = std::max(acc, base[l * inner]);
        q[o * inner + in] = acc;
      } else {
        T acc = T(0);
        for (std::size_t l = 0; l < len; ++l) acc += base[l * inner];
        if (op == ReduceOp::mean) acc /= static_cast<T>(len);
        q[o * inner + in] = acc;
      }
    }
  }
  return out;
}

template <typename T>
T sum(const Tensor<T>& a) {
  return reduce(ReduceOp::sum, a)[0];
}

template <typename T>
T mean(const Tensor<T>& a) {
  return reduce(ReduceOp::mean, a)[0];
}

/// Flat index of the maximum; lowest index wins ties.
template <typename T>
std::size_t argmax_index(const T* p, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

template <typename T>
std::size_t argmax_index(const Tensor<T>& a) {
  if (a.empty()) throw Error("argmax of empty tensor");
  return argmax_index(a.data(), a.size());
}

}  // namespace signbench

#endif  // SIGNBENCH_TENSOR_HPP
