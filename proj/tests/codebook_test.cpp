#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "signbench/codebook.hpp"
#include "test_util.hpp"

using namespace signbench;

namespace {

// Exhaustive 1-D k-means oracle: tries every assignment of n points to k
// clusters and returns the minimum SSE.
double brute_force_optimum(const std::vector<double>& pts, std::size_t k) {
  std::size_t n = pts.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= k;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> label(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      label[i] = c % k;
      c /= k;
    }
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[label[i]] += pts[i];
      ++cnt[label[i]];
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double mu = sum[label[i]] / static_cast<double>(cnt[label[i]]);
      sse += (pts[i] - mu) * (pts[i] - mu);
    }
    best = std::min(best, sse);
  }
  return best;
}

// Independent nearest-centroid scan using the plain squared-distance form.
template <typename T>
std::size_t nearest_oracle(const T* x, const Vocabulary<T>& vocab) {
  std::size_t best = 0;
  double bestd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < vocab.k; ++j) {
    double d = 0.0;
    for (std::size_t t = 0; t < vocab.dim; ++t) {
      double diff = double(x[t]) - double(vocab.centroid(j)[t]);
      d += diff * diff;
    }
    if (d < bestd) {
      bestd = d;
      best = j;
    }
  }
  return best;
}

Vocabulary<double> fit_1d(const std::vector<double>& pts, std::size_t k, std::uint64_t seed) {
  return kmeans_fit(pts.data(), pts.size(), 1, k, KmeansOptions{}, SeededRng(seed, 0));
}

template <typename T>
DescriptorSet<T> set_from_rows(const std::vector<std::vector<T>>& rows) {
  DescriptorSet<T> ds;
  for (const auto& r : rows) {
    std::vector<T> row(kDescriptorDim, T(0));
    std::copy(r.begin(), r.end(), row.begin());
    ds.data.insert(ds.data.end(), row.begin(), row.end());
  }
  return ds;
}

}  // namespace

TEST(Kmeans, TwoBlobs1D) {
  std::vector<double> pts = {0, 1, 10, 11};
  auto vocab = fit_1d(pts, 2, 7);
  std::vector<double> centroids = {vocab.centroids[0], vocab.centroids[1]};
  std::sort(centroids.begin(), centroids.end());
  EXPECT_NEAR(centroids[0], 0.5, 1e-9);
  EXPECT_NEAR(centroids[1], 10.5, 1e-9);
  EXPECT_NEAR(vocab.objective, 1.0, 1e-9);
  EXPECT_NEAR(brute_force_optimum(pts, 2), 1.0, 1e-12);
}

TEST(Kmeans, KEqualsNGivesZeroObjective) {
  std::vector<double> pts = {3, -1, 7, 2.5};
  auto vocab = fit_1d(pts, 4, 3);
  EXPECT_NEAR(vocab.objective, 0.0, 1e-12);
  std::vector<double> centroids(vocab.centroids.begin(), vocab.centroids.end());
  std::sort(centroids.begin(), centroids.end());
  std::vector<double> expect = pts;
  std::sort(expect.begin(), expect.end());
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(centroids[i], expect[i], 1e-12);
}

TEST(Kmeans, KOneIsGlobalMean) {
  std::vector<double> pts = {1, 2, 3, 4, 10};
  auto vocab = fit_1d(pts, 1, 1);
  double mu = 4.0;
  EXPECT_NEAR(vocab.centroids[0], mu, 1e-12);
  double sse = 0.0;
  for (double p : pts) sse += (p - mu) * (p - mu);
  EXPECT_NEAR(vocab.objective, sse, 1e-9);
}

TEST(Kmeans, ContractErrors) {
  std::vector<double> pts = {1, 2};
  EXPECT_THROW(fit_1d(pts, 0, 1), Error);
  EXPECT_THROW(fit_1d(pts, 3, 1), Error);
}

TEST(Kmeans, ObjectiveNonIncreasing1000x128) {
  SeededRng rng(555, 0);
  std::size_t n = 1000, dim = 128;
  std::vector<double> pts(n * dim);
  for (auto& v : pts) v = rng.uniform(0.0, 1.0);
  auto vocab = kmeans_fit(pts.data(), n, dim, 50, KmeansOptions{}, SeededRng(1, 2));
  ASSERT_GE(vocab.objective_history.size(), 2u);
  for (std::size_t t = 1; t < vocab.objective_history.size(); ++t)
    ASSERT_LE(vocab.objective_history[t],
              vocab.objective_history[t - 1] * (1.0 + 1e-12));
  EXPECT_TRUE(std::isfinite(vocab.objective));
  EXPECT_GE(vocab.objective, 0.0);
}

TEST(Kmeans, IdempotentAfterConvergence) {
  SeededRng rng(9, 9);
  std::size_t n = 60, dim = 2;
  std::vector<double> pts(n * dim);
  for (auto& v : pts) v = rng.uniform(0.0, 1.0);
  auto vocab = kmeans_fit(pts.data(), n, dim, 4, KmeansOptions{}, SeededRng(4, 0));

  // One manual Lloyd step: assignments, mean update, reassignment.
  std::vector<std::size_t> before(n), after(n);
  for (std::size_t i = 0; i < n; ++i) before[i] = assign(pts.data() + i * dim, dim, vocab);
  std::vector<double> sums(vocab.k * dim, 0.0);
  std::vector<std::size_t> cnt(vocab.k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) sums[before[i] * dim + d] += pts[i * dim + d];
    ++cnt[before[i]];
  }
  Vocabulary<double> next = vocab;
  for (std::size_t j = 0; j < vocab.k; ++j) {
    ASSERT_GT(cnt[j], 0u);
    for (std::size_t d = 0; d < dim; ++d)
      next.centroid(j)[d] = sums[j * dim + d] / double(cnt[j]);
  }
  for (std::size_t i = 0; i < n; ++i) after[i] = assign(pts.data() + i * dim, dim, next);
  EXPECT_EQ(before, after);
}

TEST(Kmeans, BruteForceOracle1D) {
  SeededRng rng(31337, 0);
  for (std::size_t n = 2; n <= 8; ++n) {
    for (std::size_t k = 1; k <= std::min<std::size_t>(3, n); ++k) {
      for (int inst = 0; inst < 3; ++inst) {
        std::vector<double> pts(n);
        for (auto& p : pts) p = rng.uniform(-5.0, 5.0);
        double opt = brute_force_optimum(pts, k);
        double best_seen = std::numeric_limits<double>::infinity();
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
          auto vocab = kmeans_fit(pts.data(), n, 1, k, KmeansOptions{}, SeededRng(seed, 0));
          ASSERT_GE(vocab.objective, opt - 1e-9)
              << "n=" << n << " k=" << k << " seed=" << seed;
          best_seen = std::min(best_seen, vocab.objective);
        }
        EXPECT_LE(best_seen, opt + 1e-9) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Assign, ExactMatchTieAndOracle) {
  Vocabulary<double> vocab;
  vocab.k = 4;
  vocab.dim = 2;
  vocab.centroids = {5, 5, 1, 0, -1, 0, 2, 2};
  double probe[2] = {2, 2};
  EXPECT_EQ(assign(probe, 2, vocab), 3u);

  // Equidistant from centroids 1 and 2: tie goes to the lower index.
  double mid[2] = {0, 0};
  EXPECT_EQ(assign(mid, 2, vocab), 1u);

  double wrong_dim[3] = {0, 0, 0};
  EXPECT_THROW(assign(wrong_dim, 3, vocab), Error);

  SeededRng rng(12, 0);
  Vocabulary<float> v2;
  v2.k = 10;
  v2.dim = 16;
  v2.centroids.resize(160);
  for (auto& c : v2.centroids) c = float(rng.uniform(-1.0, 1.0));
  for (int trial = 0; trial < 200; ++trial) {
    float x[16];
    for (auto& t : x) t = float(rng.uniform(-1.0, 1.0));
    EXPECT_EQ(assign(x, 16, v2), nearest_oracle(x, v2));
  }
}

TEST(Histogram, CountsAndNormalisation) {
  // Three well separated centroids; descriptors land on (0,0,1,2).
  Vocabulary<double> vocab;
  vocab.k = 3;
  vocab.dim = kDescriptorDim;
  vocab.centroids.assign(3 * kDescriptorDim, 0.0);
  vocab.centroids[0 * kDescriptorDim] = 0.0;
  vocab.centroids[1 * kDescriptorDim] = 10.0;
  vocab.centroids[2 * kDescriptorDim] = 20.0;

  auto ds = set_from_rows<double>({{0.1}, {0.2}, {10.1}, {19.9}});
  auto hist = encode_histogram(ds, vocab);
  EXPECT_NEAR(hist.frequencies[0], 0.5, 1e-12);
  EXPECT_NEAR(hist.frequencies[1], 0.25, 1e-12);
  EXPECT_NEAR(hist.frequencies[2], 0.25, 1e-12);

  // Duplicating the descriptor multiset leaves the histogram unchanged.
  auto doubled = ds;
  doubled.data.insert(doubled.data.end(), ds.data.begin(), ds.data.end());
  auto hist2 = encode_histogram(doubled, vocab);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(hist.frequencies[i], hist2.frequencies[i], 1e-12);

  DescriptorSet<double> empty;
  EXPECT_THROW(encode_histogram(empty, vocab), Error);
}

TEST(Histogram, AllOnOneWordAndL1Property) {
  Vocabulary<double> vocab;
  vocab.k = 5;
  vocab.dim = kDescriptorDim;
  vocab.centroids.assign(5 * kDescriptorDim, 0.0);
  for (std::size_t j = 1; j < 5; ++j) vocab.centroids[j * kDescriptorDim] = 10.0 * double(j);

  auto ds = set_from_rows<double>({{0.0}, {0.1}, {0.2}});
  auto hist = encode_histogram(ds, vocab);
  EXPECT_NEAR(hist.frequencies[0], 1.0, 1e-12);
  for (std::size_t j = 1; j < 5; ++j) EXPECT_EQ(hist.frequencies[j], 0.0);

  SeededRng rng(404, 0);
  for (int trial = 0; trial < 20; ++trial) {
    DescriptorSet<double> rds;
    std::size_t cnt = 1 + rng.uniform_index(40);
    rds.data.resize(cnt * kDescriptorDim);
    for (auto& v : rds.data) v = rng.uniform(0.0, 30.0);
    auto h = encode_histogram(rds, vocab);
    double s = 0.0;
    for (double f : h.frequencies) {
      EXPECT_GE(f, 0.0);
      s += f;
    }
    ASSERT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(PoolDescriptors, CapSamplingDeterministic) {
  std::vector<DescriptorSet<float>> sets(3);
  for (std::size_t s = 0; s < 3; ++s) {
    sets[s].data.resize(10 * kDescriptorDim);
    for (std::size_t i = 0; i < sets[s].data.size(); ++i)
      sets[s].data[i] = float(s * 1000 + i);
  }
  auto all = pool_descriptors(sets, 0, SeededRng(1, 1));
  EXPECT_EQ(all.size(), 30 * kDescriptorDim);

  auto a = pool_descriptors(sets, 7, SeededRng(2, 2));
  auto b = pool_descriptors(sets, 7, SeededRng(2, 2));
  EXPECT_EQ(a.size(), 7 * kDescriptorDim);
  EXPECT_EQ(a, b);
  auto c = pool_descriptors(sets, 7, SeededRng(3, 2));
  EXPECT_NE(a, c);
}

TEST(VocabularyFile, RoundTrip) {
  Vocabulary<float> vocab;
  vocab.k = 4;
  vocab.dim = 8;
  vocab.centroids.resize(32);
  SeededRng rng(8, 8);
  for (auto& c : vocab.centroids) c = float(rng.uniform(-2.0, 2.0));

  auto path = (std::filesystem::temp_directory_path() / "vocab_test.bovw").string();
  save_vocabulary(vocab, path);
  auto loaded = load_vocabulary<float>(path);
  EXPECT_EQ(loaded.k, vocab.k);
  EXPECT_EQ(loaded.dim, vocab.dim);
  EXPECT_EQ(loaded.centroids, vocab.centroids);
  std::filesystem::remove(path);

  EXPECT_THROW(load_vocabulary<float>("/nonexistent/vocab.bovw"), DataError);
}
