#ifndef SIGNBENCH_KNN_HPP
#define SIGNBENCH_KNN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "signbench/codebook.hpp"
#include "signbench/parallel.hpp"

namespace signbench {

/// Distance family of the classifier: Manhattan (L1), Euclidean (L2) and
/// their Minkowski generalisation of order p >= 1.
struct DistanceMetric {
  enum class Kind { manhattan, euclidean, minkowski };
  Kind kind = Kind::euclidean;
  double order = 2.0;  // minkowski only

  static DistanceMetric manhattan() { return {Kind::manhattan, 1.0}; }
  static DistanceMetric euclidean() { return {Kind::euclidean, 2.0}; }
  static DistanceMetric minkowski(double p) {
    if (!(p >= 1.0)) throw Error("minkowski order must be >= 1, got " + std::to_string(p));
    return {Kind::minkowski, p};
  }

  std::string name() const {
    switch (kind) {
      case Kind::manhattan: return "manhattan";
      case Kind::euclidean: return "euclidean";
      case Kind::minkowski: {
        std::string p = std::to_string(order);
        p.erase(p.find_last_not_of('0') + 1);
        if (!p.empty() && p.back() == '.') p.pop_back();
        return "minkowski:" + p;
      }
    }
    return "?";
  }
};

/// Parses "manhattan" | "l1" | "euclidean" | "l2" | "minkowski:<p>".
inline DistanceMetric parse_metric(const std::string& s) {
  if (s == "manhattan" || s == "l1" || s == "L1") return DistanceMetric::manhattan();
  if (s == "euclidean" || s == "l2" || s == "L2") return DistanceMetric::euclidean();
  const std::string prefix = "minkowski:";
  if (s.rfind(prefix, 0) == 0) {
    double p = 0;
    try {
      p = std::stod(s.substr(prefix.size()));
    } catch (const std::exception&) {
      throw ConfigError("bad minkowski order in metric '" + s + "'");
    }
    if (!(p >= 1.0)) throw ConfigError("minkowski order must be >= 1 in '" + s + "'");
    return DistanceMetric::minkowski(p);
  }
  throw ConfigError("unknown distance metric '" + s + "'");
}

template <typename T>
double distance(const T* p, const T* q, std::size_t dim, const DistanceMetric& metric) {
  double order = metric.order;
  if (metric.kind == DistanceMetric::Kind::manhattan) order = 1.0;
  if (metric.kind == DistanceMetric::Kind::euclidean) order = 2.0;
  if (!(order >= 1.0)) throw Error("distance order must be >= 1");
  if (order == 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += std::fabs(double(p[i]) - double(q[i]));
    return s;
  }
  if (order == 2.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double d = double(p[i]) - double(q[i]);
      s += d * d;
    }
    return std::sqrt(s);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    s += std::pow(std::fabs(double(p[i]) - double(q[i])), order);
  return std::pow(s, 1.0 / order);
}

template <typename T>
double distance(const std::vector<T>& p, const std::vector<T>& q, const DistanceMetric& metric) {
  if (p.size() != q.size())
    throw Error("distance dimension mismatch: " + std::to_string(p.size()) + " vs " +
                std::to_string(q.size()));
  return distance(p.data(), q.data(), p.size(), metric);
}

/// The lazy classifier's training set: reference histograms plus labels.
template <typename T>
struct KnnModel {
  std::size_t dim = 0;
  std::vector<T> refs;     // count × dim
  std::vector<int> labels;

  std::size_t count() const { return labels.size(); }
  const T* ref(std::size_t i) const { return refs.data() + i * dim; }
};

template <typename T>
KnnModel<T> make_knn_model(const std::vector<BowHistogram<T>>& hists) {
  if (hists.empty()) throw Error("knn model needs at least one reference");
  KnnModel<T> model;
  model.dim = hists[0].frequencies.size();
  model.refs.reserve(hists.size() * model.dim);
  for (const auto& h : hists) {
    if (h.frequencies.size() != model.dim) throw Error("inconsistent histogram sizes");
    if (h.label < 0) throw Error("knn reference histogram without a label");
    model.refs.insert(model.refs.end(), h.frequencies.begin(), h.frequencies.end());
    model.labels.push_back(h.label);
  }
  return model;
}

/// Majority label among the k nearest references. Distance ties between
/// references break to the lower reference index; vote ties go to the tied
/// class whose nearest member is closest, then to the lower class index.
template <typename T>
int knn_predict(const KnnModel<T>& model, const T* query, std::size_t k,
                const DistanceMetric& metric) {
  std::size_t n = model.count();
  if (k == 0 || k > n)
    throw Error("knn k=" + std::to_string(k) + " out of range for " + std::to_string(n) +
                " references");
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = distance(model.ref(i), query, model.dim, metric);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (dist[a] != dist[b]) return dist[a] < dist[b];
                      return a < b;
                    });

  int max_label = 0;
  for (int l : model.labels) max_label = std::max(max_label, l);
  std::vector<std::size_t> votes(max_label + 1, 0);
  std::vector<double> closest(max_label + 1, std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < k; ++r) {
    int lbl = model.labels[order[r]];
    ++votes[lbl];
    closest[lbl] = std::min(closest[lbl], dist[order[r]]);
  }
  int best = -1;
  for (int c = 0; c <= max_label; ++c) {
    if (votes[c] == 0) continue;
    if (best < 0 || votes[c] > votes[best] ||
        (votes[c] == votes[best] && closest[c] < closest[best]))
      best = c;
  }
  return best;
}

/// Fraction of queries whose predicted class matches the given label.
template <typename T>
double knn_evaluate(const KnnModel<T>& model, const std::vector<T>& queries,
                    const std::vector<int>& labels, std::size_t k,
                    const DistanceMetric& metric) {
  if (labels.empty()) throw Error("knn_evaluate: empty query set");
  if (queries.size() != labels.size() * model.dim)
    throw Error("knn_evaluate: queries/labels misaligned");
  std::size_t n = labels.size();
  std::vector<std::uint8_t> correct(n, 0);
  parallel_for(0, n, 16, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      correct[i] =
          knn_predict(model, queries.data() + i * model.dim, k, metric) == labels[i] ? 1 : 0;
  });
  std::size_t hits = 0;
  for (auto c : correct) hits += c;
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace signbench

#endif  // SIGNBENCH_KNN_HPP
