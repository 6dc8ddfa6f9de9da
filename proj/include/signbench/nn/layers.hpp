#ifndef SIGNBENCH_NN_LAYERS_HPP
#define SIGNBENCH_NN_LAYERS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "signbench/nn/activations.hpp"
#include "signbench/parallel.hpp"
#include "signbench/rng.hpp"
#include "signbench/tensor.hpp"

namespace signbench {

enum class Mode { train, infer };
enum class Padding { same, valid };

/// Forward/backward building block. backward() consumes the caches left by
/// the most recent forward() call; parameter gradients accumulate into
/// grads() until zero_grads().
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
  virtual std::vector<Tensor<T>*> params() { return {}; }
  virtual std::vector<Tensor<T>*> grads() { return {}; }
  virtual std::vector<Tensor<T>*> state() { return {}; }  // non-trained (BN running stats)
  virtual std::string kind() const = 0;
  virtual Shape output_shape(const Shape& in) const = 0;

  void zero_grads() {
    for (auto* g : grads()) g->fill(T(0));
  }
};

// ---------------------------------------------------------------------------
// Conv2d: NHWC cross-correlation via per-image im2col + GEMM.
// ---------------------------------------------------------------------------

template <typename T>
class Conv2dLayer final : public Layer<T> {
 public:
  Conv2dLayer(std::size_t in_channels, std::size_t filters, std::size_t kernel,
              std::size_t stride, Padding padding, SeededRng rng)
      : cin_(in_channels), cout_(filters), k_(kernel), stride_(stride), padding_(padding),
        w_({kernel, kernel, in_channels, filters}), b_({filters}),
        dw_(w_.shape()), db_(b_.shape()) {
    if (filters == 0 || kernel == 0 || stride == 0)
      throw Error("conv2d: filters, kernel and stride must be positive");
    // He fan-in initialisation.
    T std_dev = std::sqrt(T(2) / static_cast<T>(kernel * kernel * in_channels));
    for (std::size_t i = 0; i < w_.size(); ++i)
      w_[i] = static_cast<T>(rng.next_normal()) * std_dev;
  }

  Shape output_shape(const Shape& in) const override {
    if (in.size() != 4 || in[3] != cin_)
      throw Error("conv2d expects N×H×W×" + std::to_string(cin_) + ", got " + shape_str(in));
    auto [ho, wo, pt, pl] = geometry(in[1], in[2]);
    (void)pt;
    (void)pl;
    return {in[0], ho, wo, cout_};
  }

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    Shape out_shape = output_shape(x.shape());
    x_ = x;
    Tensor<T> y(out_shape);
    const std::size_t n = x.dim(0), ho = out_shape[1], wo = out_shape[2];
    const std::size_t cols = k_ * k_ * cin_;
    parallel_for(0, n, 1, [&](std::size_t lo, std::size_t hi) {
      std::vector<T> col(ho * wo * cols);
      for (std::size_t img = lo; img < hi; ++img) {
        im2col(x, img, col.data());
        gemm(col.data(), w_.data(), y.data() + img * ho * wo * cout_, ho * wo, cols, cout_);
        T* rows = y.data() + img * ho * wo * cout_;
        for (std::size_t r = 0; r < ho * wo; ++r)
          for (std::size_t c = 0; c < cout_; ++c) rows[r * cout_ + c] += b_[c];
      }
    });
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const std::size_t n = x_.dim(0), h = x_.dim(1), w = x_.dim(2);
    auto [ho, wo, pt, pl] = geometry(h, w);
    (void)pt;
    (void)pl;
    const std::size_t cols = k_ * k_ * cin_;
    const std::size_t rows = ho * wo;
    Tensor<T> dx(x_.shape());
    Tensor<T> wt = transposed(w_.reshaped({cols, cout_}));

    // Per-image partials folded serially in image order.
    std::vector<std::vector<T>> dw_part(n);
    std::vector<std::vector<T>> db_part(n);
    parallel_for(0, n, 1, [&](std::size_t lo, std::size_t hi) {
      std::vector<T> col(rows * cols);
      std::vector<T> dcol(rows * cols);
      for (std::size_t img = lo; img < hi; ++img) {
        const T* dyi = dy.data() + img * rows * cout_;
        im2col(x_, img, col.data());
        dw_part[img].assign(cols * cout_, T(0));
        gemm_tn(col.data(), dyi, dw_part[img].data(), rows, cols, cout_, false);
        db_part[img].assign(cout_, T(0));
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cout_; ++c) db_part[img][c] += dyi[r * cout_ + c];
        gemm(dyi, wt.data(), dcol.data(), rows, cout_, cols);
        col2im(dcol.data(), img, dx);
      }
    });
    for (std::size_t img = 0; img < n; ++img) {
      for (std::size_t i = 0; i < dw_.size(); ++i) dw_[i] += dw_part[img][i];
      for (std::size_t c = 0; c < cout_; ++c) db_[c] += db_part[img][c];
    }
    return dx;
  }

  std::vector<Tensor<T>*> params() override { return {&w_, &b_}; }
  std::vector<Tensor<T>*> grads() override { return {&dw_, &db_}; }
  std::string kind() const override { return "conv2d"; }

 private:
  struct Geo {
    std::size_t ho, wo;
    long pad_top, pad_left;
  };

  Geo geometry(std::size_t h, std::size_t w) const {
    if (padding_ == Padding::same) {
      std::size_t ho = (h + stride_ - 1) / stride_;
      std::size_t wo = (w + stride_ - 1) / stride_;
      long pad_h = std::max<long>(long((ho - 1) * stride_ + k_) - long(h), 0);
      long pad_w = std::max<long>(long((wo - 1) * stride_ + k_) - long(w), 0);
      return {ho, wo, pad_h / 2, pad_w / 2};
    }
    if (h < k_ || w < k_)
      throw Error("conv2d: kernel " + std::to_string(k_) + " larger than input " +
                  std::to_string(h) + "x" + std::to_string(w));
    return {(h - k_) / stride_ + 1, (w - k_) / stride_ + 1, 0, 0};
  }

  void im2col(const Tensor<T>& x, std::size_t img, T* col) const {
    const std::size_t h = x.dim(1), w = x.dim(2);
    auto [ho, wo, pad_top, pad_left] = geometry(h, w);
    const T* src = x.data() + img * h * w * cin_;
    std::size_t idx = 0;
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        long base_y = long(oy * stride_) - pad_top;
        long base_x = long(ox * stride_) - pad_left;
        for (std::size_t ky = 0; ky < k_; ++ky) {
          long iy = base_y + long(ky);
          for (std::size_t kx = 0; kx < k_; ++kx) {
            long ix = base_x + long(kx);
            if (iy < 0 || iy >= long(h) || ix < 0 || ix >= long(w)) {
              for (std::size_t c = 0; c < cin_; ++c) col[idx++] = T(0);
            } else {
              const T* px = src + (std::size_t(iy) * w + std::size_t(ix)) * cin_;
              for (std::size_t c = 0; c < cin_; ++c) col[idx++] = px[c];
            }
          }
        }
      }
    }
  }

  void col2im(const T* dcol, std::size_t img, Tensor<T>& dx) const {
    const std::size_t h = dx.dim(1), w = dx.dim(2);
    auto [ho, wo, pad_top, pad_left] = geometry(h, w);
    T* dst = dx.data() + img * h * w * cin_;
    std::size_t idx = 0;
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        long base_y = long(oy * stride_) - pad_top;
        long base_x = long(ox * stride_) - pad_left;
        for (std::size_t ky = 0; ky < k_; ++ky) {
          long iy = base_y + long(ky);
          for (std::size_t kx = 0; kx < k_; ++kx) {
            long ix = base_x + long(kx);
            if (iy < 0 || iy >= long(h) || ix < 0 || ix >= long(w)) {
              idx += cin_;
            } else {
              T* px = dst + (std::size_t(iy) * w + std::size_t(ix)) * cin_;
              for (std::size_t c = 0; c < cin_; ++c) px[c] += dcol[idx++];
            }
          }
        }
      }
    }
  }

  std::size_t cin_, cout_, k_, stride_;
  Padding padding_;
  Tensor<T> w_, b_, dw_, db_;
  Tensor<T> x_;
};

// ---------------------------------------------------------------------------
// BatchNorm over the channel (last) axis.
// ---------------------------------------------------------------------------

template <typename T>
class BatchNormLayer final : public Layer<T> {
 public:
  BatchNormLayer(std::size_t channels, double epsilon = 1e-5, double momentum = 0.9)
      : channels_(channels), eps_(epsilon), momentum_(momentum),
        gamma_({channels}, T(1)), beta_({channels}),
        dgamma_({channels}), dbeta_({channels}),
        running_mean_({channels}), running_var_({channels}, T(1)) {
    if (epsilon <= 0) throw Error("batchnorm: epsilon must be positive");
  }

  Shape output_shape(const Shape& in) const override {
    if (in.empty() || in.back() != channels_)
      throw Error("batchnorm expects channel-last size " + std::to_string(channels_) + ", got " +
                  shape_str(in));
    return in;
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
    output_shape(x.shape());
    const std::size_t c = channels_;
    const std::size_t m = x.size() / c;  // reduction length per channel
    Tensor<T> y(x.shape());

    if (mode == Mode::infer) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        T scale = gamma_[ch] / std::sqrt(running_var_[ch] + static_cast<T>(eps_));
        T shift = beta_[ch] - running_mean_[ch] * scale;
        const T* px = x.data() + ch;
        T* py = y.data() + ch;
        for (std::size_t i = 0; i < m; ++i) py[i * c] = px[i * c] * scale + shift;
      }
      return y;
    }

    if (x.dim(0) < 2) throw Error("batchnorm: train mode needs batch size >= 2");

    mean_.assign(c, 0.0);
    invstd_.assign(c, 0.0);
    const T* px = x.data();
    std::vector<double> var(c, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) mean_[ch] += px[i * c + ch];
    for (std::size_t ch = 0; ch < c; ++ch) mean_[ch] /= double(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) {
        double d = double(px[i * c + ch]) - mean_[ch];
        var[ch] += d * d;
      }
    for (std::size_t ch = 0; ch < c; ++ch) {
      var[ch] /= double(m);
      invstd_[ch] = 1.0 / std::sqrt(var[ch] + eps_);
      running_mean_[ch] =
          static_cast<T>(momentum_ * double(running_mean_[ch]) + (1.0 - momentum_) * mean_[ch]);
      running_var_[ch] =
          static_cast<T>(momentum_ * double(running_var_[ch]) + (1.0 - momentum_) * var[ch]);
    }

    xhat_ = Tensor<T>(x.shape());
    T* ph = xhat_.data();
    T* py = y.data();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) {
        T h = static_cast<T>((double(px[i * c + ch]) - mean_[ch]) * invstd_[ch]);
        ph[i * c + ch] = h;
        py[i * c + ch] = gamma_[ch] * h + beta_[ch];
      }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const std::size_t c = channels_;
    const std::size_t m = dy.size() / c;
    const T* pdy = dy.data();
    const T* ph = xhat_.data();
    Tensor<T> dx(dy.shape());
    T* pdx = dx.data();

    for (std::size_t ch = 0; ch < c; ++ch) {
      double sum_dy = 0.0, sum_dy_h = 0.0, sum_xm = 0.0;
      double invstd = invstd_[ch];
      for (std::size_t i = 0; i < m; ++i) {
        double d = pdy[i * c + ch];
        double h = ph[i * c + ch];
        sum_dy += d;
        sum_dy_h += d * h;
        sum_xm += h / invstd;  // x - mu
      }
      dgamma_[ch] += static_cast<T>(sum_dy_h);
      dbeta_[ch] += static_cast<T>(sum_dy);

      double g = gamma_[ch];
      double dvar = -0.5 * g * sum_dy_h * invstd * invstd;  // sum dxhat*(x-mu)*(-1/2)istd^3
      double dmu = -g * invstd * sum_dy + dvar * (-2.0 / double(m)) * sum_xm;
      for (std::size_t i = 0; i < m; ++i) {
        double d = pdy[i * c + ch];
        double xm = ph[i * c + ch] / invstd;
        pdx[i * c + ch] =
            static_cast<T>(g * d * invstd + dvar * 2.0 * xm / double(m) + dmu / double(m));
      }
    }
    return dx;
  }

  std::vector<Tensor<T>*> params() override { return {&gamma_, &beta_}; }
  std::vector<Tensor<T>*> grads() override { return {&dgamma_, &dbeta_}; }
  std::vector<Tensor<T>*> state() override { return {&running_mean_, &running_var_}; }
  std::string kind() const override { return "batchnorm"; }

  double epsilon() const { return eps_; }

 private:
  std::size_t channels_;
  double eps_, momentum_;
  Tensor<T> gamma_, beta_, dgamma_, dbeta_;
  Tensor<T> running_mean_, running_var_;
  Tensor<T> xhat_;
  std::vector<double> mean_, invstd_;
};

// ---------------------------------------------------------------------------
// MaxPool (valid windows). Backward routes to each window's argmax, lowest
// flat index on ties.
// ---------------------------------------------------------------------------

template <typename T>
class MaxPoolLayer final : public Layer<T> {
 public:
  explicit MaxPoolLayer(std::size_t size = 2, std::size_t stride = 2)
      : size_(size), stride_(stride) {
    if (size == 0 || stride == 0) throw Error("maxpool: size and stride must be positive");
  }

  Shape output_shape(const Shape& in) const override {
    if (in.size() != 4) throw Error("maxpool expects N×H×W×C, got " + shape_str(in));
    if (in[1] < size_ || in[2] < size_)
      throw Error("maxpool window " + std::to_string(size_) + " larger than input " +
                  shape_str(in));
    return {in[0], (in[1] - size_) / stride_ + 1, (in[2] - size_) / stride_ + 1, in[3]};
  }

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    Shape os = output_shape(x.shape());
    in_shape_ = x.shape();
    const std::size_t n = os[0], ho = os[1], wo = os[2], c = os[3];
    const std::size_t h = x.dim(1), w = x.dim(2);
    Tensor<T> y(os);
    argmax_.resize(y.size());
    parallel_for(0, n, 1, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t img = lo; img < hi; ++img) {
        const T* src = x.data() + img * h * w * c;
        for (std::size_t oy = 0; oy < ho; ++oy)
          for (std::size_t ox = 0; ox < wo; ++ox)
            for (std::size_t ch = 0; ch < c; ++ch) {
              T best{};
              std::size_t best_idx = 0;
              bool first = true;
              for (std::size_t ky = 0; ky < size_; ++ky)
                for (std::size_t kx = 0; kx < size_; ++kx) {
                  std::size_t iy = oy * stride_ + ky, ix = ox * stride_ + kx;
                  std::size_t idx = (iy * w + ix) * c + ch;
                  if (first || src[idx] > best) {
                    best = src[idx];
                    best_idx = idx;
                    first = false;
                  }
                }
              std::size_t out_idx = ((img * ho + oy) * wo + ox) * c + ch;
              y[out_idx] = best;
              argmax_[out_idx] = img * h * w * c + best_idx;
            }
      }
    });
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> dx(in_shape_);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[argmax_[i]] += dy[i];
    return dx;
  }

  std::string kind() const override { return "maxpool"; }

 private:
  std::size_t size_, stride_;
  Shape in_shape_;
  std::vector<std::size_t> argmax_;
};

// ---------------------------------------------------------------------------
// Dense (affine) layer.
// ---------------------------------------------------------------------------

template <typename T>
class DenseLayer final : public Layer<T> {
 public:
  DenseLayer(std::size_t in_features, std::size_t units, SeededRng rng)
      : din_(in_features), dout_(units), w_({in_features, units}), b_({units}),
        dw_(w_.shape()), db_(b_.shape()) {
    if (units == 0) throw Error("dense: units must be positive");
    T std_dev = std::sqrt(T(2) / static_cast<T>(in_features));
    for (std::size_t i = 0; i < w_.size(); ++i)
      w_[i] = static_cast<T>(rng.next_normal()) * std_dev;
  }

  Shape output_shape(const Shape& in) const override {
    if (in.size() != 2 || in[1] != din_)
      throw Error("dense expects N×" + std::to_string(din_) + ", got " + shape_str(in));
    return {in[0], dout_};
  }

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    output_shape(x.shape());
    x_ = x;
    Tensor<T> y({x.dim(0), dout_});
    gemm(x.data(), w_.data(), y.data(), x.dim(0), din_, dout_);
    for (std::size_t i = 0; i < x.dim(0); ++i)
      for (std::size_t j = 0; j < dout_; ++j) y(i, j) += b_[j];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const std::size_t n = x_.dim(0);
    gemm_tn(x_.data(), dy.data(), dw_.data(), n, din_, dout_, false);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dout_; ++j) db_[j] += dy(i, j);
    Tensor<T> wt = transposed(w_);
    Tensor<T> dx({n, din_});
    gemm(dy.data(), wt.data(), dx.data(), n, dout_, din_);
    return dx;
  }

  std::vector<Tensor<T>*> params() override { return {&w_, &b_}; }
  std::vector<Tensor<T>*> grads() override { return {&dw_, &db_}; }
  std::string kind() const override { return "dense"; }

 private:
  std::size_t din_, dout_;
  Tensor<T> w_, b_, dw_, db_;
  Tensor<T> x_;
};

// ---------------------------------------------------------------------------
// Inverted dropout: keep with probability p, scale survivors by 1/p.
// ---------------------------------------------------------------------------

template <typename T>
class DropoutLayer final : public Layer<T> {
 public:
  DropoutLayer(double keep_prob, SeededRng rng) : p_(keep_prob), rng_(rng) {
    if (!(keep_prob > 0.0) || keep_prob > 1.0)
      throw Error("dropout: keep probability must be in (0, 1]");
  }

  Shape output_shape(const Shape& in) const override { return in; }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
    if (mode == Mode::infer || p_ == 1.0) {
      identity_ = true;
      return x;
    }
    identity_ = false;
    if (!(freeze_mask_ && mask_.same_shape(x))) {
      mask_ = Tensor<T>(x.shape());
      const T scale = T(1) / static_cast<T>(p_);
      for (std::size_t i = 0; i < mask_.size(); ++i)
        mask_[i] = rng_.next_double() < p_ ? scale : T(0);
    }
    return x * mask_;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    if (identity_) return dy;
    return dy * mask_;
  }

  /// Keeps the current mask across forwards (finite-difference checks).
  void set_freeze_mask(bool freeze) { freeze_mask_ = freeze; }

  std::string kind() const override { return "dropout"; }

 private:
  double p_;
  SeededRng rng_;
  Tensor<T> mask_;
  bool identity_ = true;
  bool freeze_mask_ = false;
};

// ---------------------------------------------------------------------------
// Flatten and activation wrappers.
// ---------------------------------------------------------------------------

template <typename T>
class FlattenLayer final : public Layer<T> {
 public:
  Shape output_shape(const Shape& in) const override {
    if (in.size() < 2) throw Error("flatten expects a batch dimension");
    std::size_t rest = 1;
    for (std::size_t i = 1; i < in.size(); ++i) rest *= in[i];
    return {in[0], rest};
  }

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    in_shape_ = x.shape();
    return x.reshaped(output_shape(x.shape()));
  }

  Tensor<T> backward(const Tensor<T>& dy) override { return dy.reshaped(in_shape_); }

  std::string kind() const override { return "flatten"; }

 private:
  Shape in_shape_;
};

template <typename T>
class ActivationLayer final : public Layer<T> {
 public:
  explicit ActivationLayer(ActivationKind kind) : kind_(kind) {}

  Shape output_shape(const Shape& in) const override {
    if (kind_ == ActivationKind::softmax && in.size() != 2)
      throw Error("softmax expects N×C, got " + shape_str(in));
    return in;
  }

  Tensor<T> forward(const Tensor<T>& x, Mode) override {
    if (kind_ == ActivationKind::softmax) {
      y_ = activation_forward(kind_, x);
      return y_;
    }
    return activation_forward(kind_, x, &deriv_);
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    if (kind_ == ActivationKind::softmax) {
      // dx_i = y_i * (dy_i - sum_j y_j dy_j), row-wise.
      std::size_t n = y_.dim(0), c = y_.dim(1);
      Tensor<T> dx(y_.shape());
      for (std::size_t i = 0; i < n; ++i) {
        const T* y = y_.data() + i * c;
        const T* g = dy.data() + i * c;
        T dot = T(0);
        for (std::size_t j = 0; j < c; ++j) dot += y[j] * g[j];
        T* out = dx.data() + i * c;
        for (std::size_t j = 0; j < c; ++j) out[j] = y[j] * (g[j] - dot);
      }
      return dx;
    }
    return dy * deriv_;
  }

  ActivationKind activation() const { return kind_; }
  std::string kind() const override { return activation_name(kind_); }

 private:
  ActivationKind kind_;
  Tensor<T> deriv_;
  Tensor<T> y_;
};

}  // namespace signbench

#endif  // SIGNBENCH_NN_LAYERS_HPP
