#ifndef SIGNBENCH_SVM_HPP
#define SIGNBENCH_SVM_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "signbench/binio.hpp"
#include "signbench/parallel.hpp"

namespace signbench {

// --------------------------------------------------------------------------
// Kernels
// --------------------------------------------------------------------------

struct KernelSpec {
  enum class Kind { linear, rbf, sigmoid, chi2, intersection };
  Kind kind = Kind::linear;
  double gamma = 0.0;  // rbf / sigmoid / chi2; 0 means "1 / feature count"
  double coef0 = 0.0;  // sigmoid

  std::string name() const {
    switch (kind) {
      case Kind::linear: return "linear";
      case Kind::rbf: return "rbf";
      case Kind::sigmoid: return "sigmoid";
      case Kind::chi2: return "chi2";
      case Kind::intersection: return "intersection";
    }
    return "?";
  }

  static KernelSpec parse(const std::string& s) {
    KernelSpec spec;
    if (s == "linear") spec.kind = Kind::linear;
    else if (s == "rbf") spec.kind = Kind::rbf;
    else if (s == "sigmoid") spec.kind = Kind::sigmoid;
    else if (s == "chi2") spec.kind = Kind::chi2;
    else if (s == "intersection" || s == "inter") spec.kind = Kind::intersection;
    else throw ConfigError("unknown kernel '" + s + "'");
    return spec;
  }

  /// Fills the gamma default (1/dim) so stored models are self-contained.
  KernelSpec resolved(std::size_t dim) const {
    KernelSpec r = *this;
    if (r.gamma == 0.0) r.gamma = 1.0 / static_cast<double>(dim);
    if (r.gamma <= 0.0) throw Error("kernel gamma must be positive");
    return r;
  }
};

namespace detail {
template <typename T>
inline void check_nonneg(const T* x, std::size_t dim, const char* kernel) {
  for (std::size_t i = 0; i < dim; ++i)
    if (x[i] < T(0))
      throw Error(std::string(kernel) + " kernel requires non-negative inputs");
}
}  // namespace detail

/// Evaluates the kernel on two vectors. chi2 uses the exponential form
/// exp(-gamma * sum (x-y)^2 / (x+y+eps)) with eps = 1e-12 guarding 0/0 on
/// sparse histograms; chi2 and intersection require non-negative inputs.
template <typename T>
double kernel_eval(const KernelSpec& spec, const T* x, const T* y, std::size_t dim) {
  switch (spec.kind) {
    case KernelSpec::Kind::linear: {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += double(x[i]) * double(y[i]);
      return s;
    }
    case KernelSpec::Kind::rbf: {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        double d = double(x[i]) - double(y[i]);
        s += d * d;
      }
      return std::exp(-spec.gamma * s);
    }
    case KernelSpec::Kind::sigmoid: {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += double(x[i]) * double(y[i]);
      return std::tanh(spec.gamma * s + spec.coef0);
    }
    case KernelSpec::Kind::chi2: {
      detail::check_nonneg(x, dim, "chi2");
      detail::check_nonneg(y, dim, "chi2");
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        double d = double(x[i]) - double(y[i]);
        s += d * d / (double(x[i]) + double(y[i]) + 1e-12);
      }
      return std::exp(-spec.gamma * s);
    }
    case KernelSpec::Kind::intersection: {
      detail::check_nonneg(x, dim, "intersection");
      detail::check_nonneg(y, dim, "intersection");
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += std::min(double(x[i]), double(y[i]));
      return s;
    }
  }
  return 0.0;
}

template <typename T>
double kernel_eval(const KernelSpec& spec, const std::vector<T>& x, const std::vector<T>& y) {
  if (x.size() != y.size())
    throw Error("kernel dimension mismatch: " + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()));
  return kernel_eval(spec, x.data(), y.data(), x.size());
}

/// Full symmetric Gram matrix, parallel over row blocks.
template <typename T>
std::vector<double> gram_matrix(const KernelSpec& spec, const T* X, std::size_t n,
                                std::size_t dim) {
  std::vector<double> gram(n * n);
  parallel_for(0, n, 8, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        gram[i * n + j] = kernel_eval(spec, X + i * dim, X + j * dim, dim);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) gram[i * n + j] = gram[j * n + i];
  return gram;
}

// --------------------------------------------------------------------------
// Binary soft-margin SVM trained in the dual by SMO
// --------------------------------------------------------------------------

struct SvmTrainOptions {
  double c = 1.0;
  double tolerance = 1e-3;    // KKT gap
  std::size_t max_iters = 10000;  // pair updates
};

/// Support vectors (alpha > 0 only), their alpha*y coefficients and bias.
template <typename T>
struct BinarySvmModel {
  KernelSpec kernel;
  double c = 1.0;
  double bias = 0.0;
  std::size_t dim = 0;
  std::vector<T> support_vectors;  // count × dim
  std::vector<double> dual_coefs;  // alpha_i * y_i
  bool converged = false;
  std::size_t iterations = 0;

  std::size_t count() const { return dual_coefs.size(); }
  const T* sv(std::size_t i) const { return support_vectors.data() + i * dim; }
};

template <typename T>
double svm_decision(const BinarySvmModel<T>& model, const T* x, std::size_t dim) {
  if (dim != model.dim)
    throw Error("svm_decision dimension mismatch: " + std::to_string(dim) + " vs model " +
                std::to_string(model.dim));
  double s = model.bias;
  for (std::size_t i = 0; i < model.count(); ++i)
    s += model.dual_coefs[i] * kernel_eval(model.kernel, model.sv(i), x, dim);
  return s;
}

namespace detail {

// SMO with first-order (maximal violating pair) working-set selection.
// Gradient is tracked as S_i = sum_j alpha_j y_j K_ij; optimality gap is
// max over the "up" set minus min over the "down" set of v_i = y_i - S_i.
template <typename T>
BinarySvmModel<T> smo_solve(const T* X, const std::vector<int>& y, std::size_t n,
                            std::size_t dim, const KernelSpec& kernel,
                            const SvmTrainOptions& opt, const std::vector<double>& gram) {
  const double C = opt.c;
  std::vector<double> alpha(n, 0.0), S(n, 0.0);

  auto movable_up = [&](std::size_t i) {
    return (y[i] > 0 && alpha[i] < C) || (y[i] < 0 && alpha[i] > 0);
  };
  auto movable_down = [&](std::size_t i) {
    return (y[i] > 0 && alpha[i] > 0) || (y[i] < 0 && alpha[i] < C);
  };

  bool converged = false;
  std::size_t iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    double up_best = -std::numeric_limits<double>::infinity();
    double down_best = std::numeric_limits<double>::infinity();
    std::size_t i1 = n, i2 = n;
    for (std::size_t t = 0; t < n; ++t) {
      double v = y[t] - S[t];
      if (movable_up(t) && v > up_best) {
        up_best = v;
        i1 = t;
      }
      if (movable_down(t) && v < down_best) {
        down_best = v;
        i2 = t;
      }
    }
    if (i1 >= n || i2 >= n || up_best - down_best <= opt.tolerance) {
      converged = true;
      break;
    }

    const double* Ki = gram.data() + i1 * n;
    const double* Kj = gram.data() + i2 * n;
    double a1 = alpha[i1], a2 = alpha[i2];
    double L, H;
    if (y[i1] != y[i2]) {
      L = std::max(0.0, a2 - a1);
      H = std::min(C, C + a2 - a1);
    } else {
      L = std::max(0.0, a1 + a2 - C);
      H = std::min(C, a1 + a2);
    }
    if (H - L < 1e-12) break;  // degenerate box; should not happen after snapping
    double eta = Ki[i1] + Kj[i2] - 2.0 * Ki[i2];
    double denom = std::max(eta, 1e-12);
    double e1 = S[i1] - y[i1], e2 = S[i2] - y[i2];
    double a2_new = a2 + y[i2] * (e1 - e2) / denom;
    a2_new = std::min(H, std::max(L, a2_new));
    double a1_new = a1 + double(y[i1]) * y[i2] * (a2 - a2_new);
    a1_new = std::min(C, std::max(0.0, a1_new));
    // Snap to the bounds so set membership stays exact and no pair can get
    // stuck a rounding error away from a box corner.
    if (a1_new < 1e-12) a1_new = 0.0;
    if (a1_new > C - 1e-12) a1_new = C;
    if (a2_new < 1e-12) a2_new = 0.0;
    if (a2_new > C - 1e-12) a2_new = C;

    double d1 = (a1_new - a1) * y[i1];
    double d2 = (a2_new - a2) * y[i2];
    if (std::fabs(d1) < 1e-15 && std::fabs(d2) < 1e-15) break;  // numerically stalled
    for (std::size_t t = 0; t < n; ++t) S[t] += d1 * Ki[t] + d2 * Kj[t];
    alpha[i1] = a1_new;
    alpha[i2] = a2_new;
  }

  // Bias: average over free vectors, else midpoint of the final bounds.
  double b;
  {
    double sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] > 1e-9 && alpha[t] < C - 1e-9) {
        sum += y[t] - S[t];
        ++free_count;
      }
    }
    if (free_count > 0) {
      b = sum / static_cast<double>(free_count);
    } else {
      double up_best = -std::numeric_limits<double>::infinity();
      double down_best = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < n; ++t) {
        double v = y[t] - S[t];
        if (movable_up(t)) up_best = std::max(up_best, v);
        if (movable_down(t)) down_best = std::min(down_best, v);
      }
      b = (up_best + down_best) / 2.0;
    }
  }

  BinarySvmModel<T> model;
  model.kernel = kernel;
  model.c = C;
  model.bias = b;
  model.dim = dim;
  model.converged = converged;
  model.iterations = iter;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    model.support_vectors.insert(model.support_vectors.end(), X + t * dim, X + (t + 1) * dim);
    model.dual_coefs.push_back(alpha[t] * y[t]);
  }
  return model;
}

}  // namespace detail

/// Trains one soft-margin binary classifier. Labels must be ±1 with both
/// classes present. Vectors with alpha = 0 are dropped from the model.
template <typename T>
BinarySvmModel<T> svm_train_binary(const T* X, const std::vector<int>& y, std::size_t dim,
                                   const KernelSpec& kernel, const SvmTrainOptions& opt = {},
                                   const std::vector<double>* shared_gram = nullptr) {
  std::size_t n = y.size();
  if (opt.c <= 0.0) throw Error("svm: C must be positive");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == -1) has_neg = true;
    else throw Error("svm: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw Error("svm: training set contains a single class");

  KernelSpec resolved = kernel.resolved(dim);
  if (shared_gram) {
    if (shared_gram->size() != n * n) throw Error("svm: shared gram size mismatch");
    return detail::smo_solve(X, y, n, dim, resolved, opt, *shared_gram);
  }
  auto gram = gram_matrix(resolved, X, n, dim);
  return detail::smo_solve(X, y, n, dim, resolved, opt, gram);
}

/// Dual objective value of a trained model: sum alpha - 1/2 sum_ij
/// alpha_i alpha_j y_i y_j K_ij. The zero vector scores 0.
template <typename T>
double svm_dual_objective(const BinarySvmModel<T>& model) {
  double lin = 0.0;
  for (double c : model.dual_coefs) lin += std::fabs(c);
  double quad = 0.0;
  for (std::size_t i = 0; i < model.count(); ++i)
    for (std::size_t j = 0; j < model.count(); ++j)
      quad += model.dual_coefs[i] * model.dual_coefs[j] *
              kernel_eval(model.kernel, model.sv(i), model.sv(j), model.dim);
  return lin - 0.5 * quad;
}

// --------------------------------------------------------------------------
// One-vs-all multiclass
// --------------------------------------------------------------------------

template <typename T>
struct OvaSvmModel {
  std::size_t class_count = 0;
  std::size_t dim = 0;
  std::vector<BinarySvmModel<T>> per_class;
};

/// Trains one binary model per class (that class +1, the rest -1) against
/// a shared Gram matrix; classes run in parallel.
template <typename T>
OvaSvmModel<T> ova_train(const T* X, const std::vector<int>& labels, std::size_t dim,
                         std::size_t class_count, const KernelSpec& kernel,
                         const SvmTrainOptions& opt = {}) {
  std::size_t n = labels.size();
  if (class_count < 2) throw Error("ova: need at least 2 classes");
  std::vector<std::size_t> counts(class_count, 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= class_count)
      throw Error("ova: label " + std::to_string(l) + " outside class range");
    ++counts[l];
  }
  for (std::size_t c = 0; c < class_count; ++c)
    if (counts[c] == 0)
      throw Error("ova: class " + std::to_string(c) + " absent from training set");

  KernelSpec resolved = kernel.resolved(dim);
  auto gram = gram_matrix(resolved, X, n, dim);

  OvaSvmModel<T> model;
  model.class_count = class_count;
  model.dim = dim;
  model.per_class.resize(class_count);
  parallel_for(0, class_count, 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == static_cast<int>(c) ? 1 : -1;
      model.per_class[c] = detail::smo_solve(X, y, n, dim, resolved, opt, gram);
    }
  });
  return model;
}

/// argmax over per-class decision values; ties go to the lowest class.
template <typename T>
int ova_predict(const OvaSvmModel<T>& model, const T* x) {
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.class_count; ++c) {
    double v = svm_decision(model.per_class[c], x, model.dim);
    if (v > best_v) {
      best_v = v;
      best = static_cast<int>(c);
    }
  }
  return best;
}

template <typename T>
double ova_evaluate(const OvaSvmModel<T>& model, const std::vector<T>& queries,
                    const std::vector<int>& labels) {
  if (labels.empty()) throw Error("ova_evaluate: empty query set");
  std::size_t n = labels.size();
  std::vector<std::uint8_t> correct(n, 0);
  parallel_for(0, n, 16, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      correct[i] = ova_predict(model, queries.data() + i * model.dim) == labels[i] ? 1 : 0;
  });
  std::size_t hits = 0;
  for (auto c : correct) hits += c;
  return static_cast<double>(hits) / static_cast<double>(n);
}

// --------------------------------------------------------------------------
// Model file: "OVAS" magic, header, then per class the bias, coefficients
// and support vectors as little-endian f32 blocks.
// --------------------------------------------------------------------------

constexpr char kSvmMagic[4] = {'O', 'V', 'A', 'S'};
constexpr std::uint32_t kSvmVersion = 1;

template <typename T>
void save_ova_model(const OvaSvmModel<T>& model, const std::string& path) {
  auto os = binio::open_out(path);
  binio::write_magic(os, kSvmMagic);
  binio::write_u32(os, kSvmVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(model.class_count));
  binio::write_u32(os, static_cast<std::uint32_t>(model.dim));
  const auto& k0 = model.per_class.empty() ? KernelSpec{} : model.per_class[0].kernel;
  binio::write_u32(os, static_cast<std::uint32_t>(k0.kind));
  binio::write_f32(os, static_cast<float>(k0.gamma));
  binio::write_f32(os, static_cast<float>(k0.coef0));
  binio::write_f32(os, model.per_class.empty() ? 1.0f : static_cast<float>(model.per_class[0].c));
  for (const auto& bin : model.per_class) {
    binio::write_u32(os, static_cast<std::uint32_t>(bin.count()));
    binio::write_f32(os, static_cast<float>(bin.bias));
    for (double c : bin.dual_coefs) binio::write_f32(os, static_cast<float>(c));
    for (T v : bin.support_vectors) binio::write_f32(os, static_cast<float>(v));
  }
  if (!os) throw DataError("failed writing svm model: " + path);
}

template <typename T = float>
OvaSvmModel<T> load_ova_model(const std::string& path) {
  auto is = binio::open_in(path);
  binio::expect_magic(is, kSvmMagic, "svm model");
  std::uint32_t version = binio::read_u32(is);
  if (version != kSvmVersion)
    throw DataError("unsupported svm model version " + std::to_string(version));
  OvaSvmModel<T> model;
  model.class_count = binio::read_u32(is);
  model.dim = binio::read_u32(is);
  KernelSpec kernel;
  kernel.kind = static_cast<KernelSpec::Kind>(binio::read_u32(is));
  kernel.gamma = binio::read_f32(is);
  kernel.coef0 = binio::read_f32(is);
  double c = binio::read_f32(is);
  model.per_class.resize(model.class_count);
  for (auto& bin : model.per_class) {
    std::uint32_t svs = binio::read_u32(is);
    bin.kernel = kernel;
    bin.c = c;
    bin.dim = model.dim;
    bin.converged = true;
    bin.bias = binio::read_f32(is);
    bin.dual_coefs.resize(svs);
    for (auto& v : bin.dual_coefs) v = binio::read_f32(is);
    bin.support_vectors.resize(svs * model.dim);
    for (auto& v : bin.support_vectors) v = static_cast<T>(binio::read_f32(is));
  }
  return model;
}

}  // namespace signbench

#endif  // SIGNBENCH_SVM_HPP
