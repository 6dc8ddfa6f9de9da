#ifndef SIGNBENCH_CODEBOOK_HPP
#define SIGNBENCH_CODEBOOK_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "signbench/binio.hpp"
#include "signbench/features.hpp"
#include "signbench/parallel.hpp"
#include "signbench/rng.hpp"
#include "signbench/tensor.hpp"

namespace signbench {

/// The visual vocabulary: K centroids in descriptor space.
template <typename T>
struct Vocabulary {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<T> centroids;  // k × dim, row-major
  double objective = 0.0;    // final within-cluster sum of squared distances
  std::size_t iterations_run = 0;
  std::vector<double> objective_history;  // SSE after each assignment phase

  const T* centroid(std::size_t j) const { return centroids.data() + j * dim; }
  T* centroid(std::size_t j) { return centroids.data() + j * dim; }
};

/// L1-normalised visual-word frequencies for one image.
template <typename T>
struct BowHistogram {
  std::vector<T> frequencies;
  int label = -1;  // class index, unset until assigned
};

struct KmeansOptions {
  std::size_t max_iters = 300;
  double tolerance = 1e-6;  // relative objective change
};

namespace detail {

template <typename T>
inline double sq_dist(const T* a, const T* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
    s += diff * diff;
  }
  return s;
}

// One assignment pass: nearest centroid per point plus the SSE objective.
// Distances go through the ‖x‖² − 2x·μ + ‖μ‖² identity so the hot loop is
// a GEMM against the transposed centroids. Parallel over fixed-size point
// blocks; the objective folds serially in block order so results do not
// depend on the thread count. Ties keep the lowest centroid index.
template <typename T>
double assign_pass(const T* pts, std::size_t n, std::size_t dim, const Vocabulary<T>& vocab,
                   std::vector<std::uint32_t>& labels) {
  const std::size_t k = vocab.k;
  std::vector<T> ct(dim * k);  // centroids transposed: dim × k
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t d = 0; d < dim; ++d) ct[d * k + j] = vocab.centroid(j)[d];
  std::vector<T> cnorm(k);
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    const T* c = vocab.centroid(j);
    for (std::size_t d = 0; d < dim; ++d) s += static_cast<double>(c[d]) * c[d];
    cnorm[j] = static_cast<T>(s);
  }

  constexpr std::size_t kGrain = 2048;
  std::size_t nblocks = (n + kGrain - 1) / kGrain;
  std::vector<double> block_obj(nblocks, 0.0);
  parallel_for(0, n, kGrain, [&](std::size_t lo, std::size_t hi) {
    std::size_t bn = hi - lo;
    std::vector<T> dots(bn * k);
    gemm(pts + lo * dim, ct.data(), dots.data(), bn, dim, k);
    double obj = 0.0;
    for (std::size_t i = 0; i < bn; ++i) {
      const T* row = dots.data() + i * k;
      T best = cnorm[0] - T(2) * row[0];
      std::uint32_t best_j = 0;
      for (std::size_t j = 1; j < k; ++j) {
        T v = cnorm[j] - T(2) * row[j];
        if (v < best) {
          best = v;
          best_j = static_cast<std::uint32_t>(j);
        }
      }
      labels[lo + i] = best_j;
      const T* x = pts + (lo + i) * dim;
      double xnorm = 0.0;
      for (std::size_t d = 0; d < dim; ++d) xnorm += static_cast<double>(x[d]) * x[d];
      obj += std::max(0.0, xnorm + static_cast<double>(best));
    }
    block_obj[lo / kGrain] = obj;
  });
  double total = 0.0;
  for (double v : block_obj) total += v;
  return total;
}

}  // namespace detail

/// Index of the nearest centroid by squared L2; ties go to the lowest index.
template <typename T>
std::size_t assign(const T* descriptor, std::size_t dim, const Vocabulary<T>& vocab) {
  if (dim != vocab.dim)
    throw Error("descriptor dimension " + std::to_string(dim) + " does not match vocabulary dim " +
                std::to_string(vocab.dim));
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < vocab.k; ++j) {
    double d = detail::sq_dist(descriptor, vocab.centroid(j), dim);
    if (d < best) {
      best = d;
      best_j = j;
    }
  }
  return best_j;
}

/// Lloyd iterations with k-means++ seeding. Alternates assignment and
/// mean update until the relative objective change drops below tolerance
/// or max_iters is hit. Empty clusters are reseeded to the point farthest
/// from the empty centroid (distinct points per reseed, lowest index ties).
template <typename T>
Vocabulary<T> kmeans_fit(const T* pts, std::size_t n, std::size_t dim, std::size_t k,
                         const KmeansOptions& opt, SeededRng rng) {
  if (k == 0) throw Error("kmeans: k must be >= 1");
  if (n < k)
    throw Error("kmeans: need at least k=" + std::to_string(k) + " points, got " +
                std::to_string(n));

  Vocabulary<T> vocab;
  vocab.k = k;
  vocab.dim = dim;
  vocab.centroids.resize(k * dim);

  // k-means++ seeding.
  {
    std::size_t first = rng.uniform_index(n);
    std::copy(pts + first * dim, pts + (first + 1) * dim, vocab.centroid(0));
    std::vector<double> d2(n);
    for (std::size_t j = 1; j < k; ++j) {
      const T* last = vocab.centroid(j - 1);
      parallel_for(0, n, 4096, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          double d = detail::sq_dist(pts + i * dim, last, dim);
          if (j == 1 || d < d2[i]) d2[i] = d;
        }
      });
      double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      std::size_t pick;
      if (total > 0.0) {
        double r = rng.next_double() * total;
        double acc = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc > r) {
            pick = i;
            break;
          }
        }
      } else {
        pick = rng.uniform_index(n);  // all remaining points coincide
      }
      std::copy(pts + pick * dim, pts + (pick + 1) * dim, vocab.centroid(j));
    }
  }

  std::vector<std::uint32_t> labels(n, 0);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  double prev_obj = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < opt.max_iters; ++iter) {
    double obj = detail::assign_pass(pts, n, dim, vocab, labels);
    vocab.objective = obj;
    vocab.objective_history.push_back(obj);
    vocab.iterations_run = iter + 1;

    bool converged = std::isfinite(prev_obj) &&
                     std::fabs(prev_obj - obj) <= opt.tolerance * std::max(prev_obj, 1e-300);
    if (converged) break;
    prev_obj = obj;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const T* x = pts + i * dim;
      double* s = sums.data() + labels[i] * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += static_cast<double>(x[d]);
      ++counts[labels[i]];
    }

    std::vector<char> reseed_used(n, 0);
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      double far = -1.0;
      std::size_t far_i = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (reseed_used[i]) continue;
        double d = detail::sq_dist(pts + i * dim, vocab.centroid(j), dim);
        if (d > far) {
          far = d;
          far_i = i;
        }
      }
      reseed_used[far_i] = 1;
      const T* x = pts + far_i * dim;
      double* s = sums.data() + j * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] = static_cast<double>(x[d]);
      counts[j] = 1;
    }

    for (std::size_t j = 0; j < k; ++j) {
      T* c = vocab.centroid(j);
      double inv = 1.0 / static_cast<double>(counts[j]);
      const double* s = sums.data() + j * dim;
      for (std::size_t d = 0; d < dim; ++d) c[d] = static_cast<T>(s[d] * inv);
    }
  }

  return vocab;
}

template <typename T>
Vocabulary<T> kmeans_fit(const std::vector<T>& pts, std::size_t dim, std::size_t k,
                         const KmeansOptions& opt, SeededRng rng) {
  return kmeans_fit(pts.data(), pts.size() / dim, dim, k, opt, rng);
}

/// Flattens per-image descriptor sets into one matrix, uniformly sampling
/// (seeded, without replacement, index order preserved) when the pooled
/// count exceeds `cap`.
template <typename T>
std::vector<T> pool_descriptors(const std::vector<DescriptorSet<T>>& sets, std::size_t cap,
                                SeededRng rng) {
  std::size_t total = 0;
  for (const auto& s : sets) total += s.count();
  if (cap == 0 || total <= cap) {
    std::vector<T> out;
    out.reserve(total * kDescriptorDim);
    for (const auto& s : sets) out.insert(out.end(), s.data.begin(), s.data.end());
    return out;
  }
  std::vector<std::size_t> index(total);
  std::iota(index.begin(), index.end(), 0);
  for (std::size_t i = 0; i < cap; ++i) {
    std::size_t j = i + rng.uniform_index(total - i);
    std::swap(index[i], index[j]);
  }
  index.resize(cap);
  std::sort(index.begin(), index.end());

  std::vector<const T*> rows;
  rows.reserve(total);
  for (const auto& s : sets)
    for (std::size_t i = 0; i < s.count(); ++i) rows.push_back(s.descriptor(i));
  std::vector<T> out;
  out.reserve(cap * kDescriptorDim);
  for (std::size_t i : index) out.insert(out.end(), rows[i], rows[i] + kDescriptorDim);
  return out;
}

/// Visual-word occurrence frequencies, L1-normalised so the histogram does
/// not depend on the descriptor count.
template <typename T>
BowHistogram<T> encode_histogram(const DescriptorSet<T>& ds, const Vocabulary<T>& vocab) {
  if (ds.count() == 0) throw Error("encode_histogram: empty descriptor set");
  BowHistogram<T> hist;
  hist.frequencies.assign(vocab.k, T(0));
  for (std::size_t i = 0; i < ds.count(); ++i)
    hist.frequencies[assign(ds.descriptor(i), kDescriptorDim, vocab)] += T(1);
  T inv = T(1) / static_cast<T>(ds.count());
  for (T& f : hist.frequencies) f *= inv;
  return hist;
}

// --------------------------------------------------------------------------
// Vocabulary file: "BOVW" magic, version, k, dim, then k*dim f32 (LE).
// --------------------------------------------------------------------------

constexpr char kVocabMagic[4] = {'B', 'O', 'V', 'W'};
constexpr std::uint32_t kVocabVersion = 1;

template <typename T>
void save_vocabulary(const Vocabulary<T>& vocab, const std::string& path) {
  auto os = binio::open_out(path);
  binio::write_magic(os, kVocabMagic);
  binio::write_u32(os, kVocabVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(vocab.k));
  binio::write_u32(os, static_cast<std::uint32_t>(vocab.dim));
  for (T v : vocab.centroids) binio::write_f32(os, static_cast<float>(v));
  if (!os) throw DataError("failed writing vocabulary: " + path);
}

template <typename T = float>
Vocabulary<T> load_vocabulary(const std::string& path) {
  auto is = binio::open_in(path);
  binio::expect_magic(is, kVocabMagic, "vocabulary");
  std::uint32_t version = binio::read_u32(is);
  if (version != kVocabVersion)
    throw DataError("unsupported vocabulary version " + std::to_string(version));
  Vocabulary<T> vocab;
  vocab.k = binio::read_u32(is);
  vocab.dim = binio::read_u32(is);
  vocab.centroids.resize(vocab.k * vocab.dim);
  for (auto& v : vocab.centroids) v = static_cast<T>(binio::read_f32(is));
  return vocab;
}

}  // namespace signbench

#endif  // SIGNBENCH_CODEBOOK_HPP
