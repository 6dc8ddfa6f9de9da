#ifndef SIGNBENCH_CONFIG_HPP
#define SIGNBENCH_CONFIG_HPP

#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "signbench/knn.hpp"
#include "signbench/nn/train.hpp"
#include "signbench/svm.hpp"

namespace signbench {

enum class Pipeline { knn_grid, svm_grid, cnn };

inline Pipeline parse_pipeline(const std::string& s) {
  if (s == "knn-grid") return Pipeline::knn_grid;
  if (s == "svm-grid") return Pipeline::svm_grid;
  if (s == "cnn") return Pipeline::cnn;
  throw ConfigError("unknown pipeline '" + s + "'");
}

inline std::string pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::knn_grid: return "knn-grid";
    case Pipeline::svm_grid: return "svm-grid";
    case Pipeline::cnn: return "cnn";
  }
  return "?";
}

/// Experiment grids plus run parameters. Defaults reproduce the benchmark
/// grids: vocabularies {50,75,100}, k in {1,3,5,10,15,20,50,75,100}, both
/// L1/L2 metrics and the five kernels.
struct ExperimentConfig {
  Pipeline pipeline = Pipeline::knn_grid;
  std::vector<std::size_t> vocab_sizes = {50, 75, 100};
  std::vector<std::size_t> k_values = {1, 3, 5, 10, 15, 20, 50, 75, 100};
  std::vector<std::string> metrics = {"euclidean", "manhattan"};
  std::vector<std::string> kernels = {"rbf", "linear", "sigmoid", "chi2", "intersection"};
  double svm_c = 1.0;
  double svm_gamma = 0.0;  // 0 = 1/vocab_size
  std::size_t svm_max_iters = 10000;
  std::size_t kmeans_max_iters = 300;
  double kmeans_tolerance = 1e-6;
  std::size_t descriptor_cap = 200000;
  double train_fraction = 0.8;
  TrainConfig train;
  std::uint64_t seed = 1;
  std::string data_dir;
  std::string test_dir;  // optional held-out set
  bool verbose = true;

  void validate() const {
    if (pipeline != Pipeline::cnn) {
      if (vocab_sizes.empty()) throw ConfigError("vocab_sizes must be non-empty");
      if (pipeline == Pipeline::knn_grid && (k_values.empty() || metrics.empty()))
        throw ConfigError("knn-grid needs non-empty k_values and metrics");
      if (pipeline == Pipeline::svm_grid && kernels.empty())
        throw ConfigError("svm-grid needs non-empty kernels");
      for (const auto& m : metrics) parse_metric(m);
      for (const auto& k : kernels) KernelSpec::parse(k);
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ConfigError("train_fraction must be in (0,1)");
    train.validate();
  }
};

namespace detail {

template <typename T>
void maybe_get(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("pipeline")) cfg.pipeline = parse_pipeline(j.at("pipeline"));
    detail::maybe_get(j, "vocab_sizes", cfg.vocab_sizes);
    detail::maybe_get(j, "k_values", cfg.k_values);
    detail::maybe_get(j, "metrics", cfg.metrics);
    detail::maybe_get(j, "kernels", cfg.kernels);
    detail::maybe_get(j, "svm_c", cfg.svm_c);
    detail::maybe_get(j, "svm_gamma", cfg.svm_gamma);
    detail::maybe_get(j, "svm_max_iters", cfg.svm_max_iters);
    detail::maybe_get(j, "kmeans_max_iters", cfg.kmeans_max_iters);
    detail::maybe_get(j, "kmeans_tolerance", cfg.kmeans_tolerance);
    detail::maybe_get(j, "descriptor_cap", cfg.descriptor_cap);
    detail::maybe_get(j, "train_fraction", cfg.train_fraction);
    detail::maybe_get(j, "seed", cfg.seed);
    detail::maybe_get(j, "data", cfg.data_dir);
    detail::maybe_get(j, "test", cfg.test_dir);
    if (j.contains("train")) {
      const auto& t = j.at("train");
      detail::maybe_get(t, "batch_size", cfg.train.batch_size);
      detail::maybe_get(t, "max_epochs", cfg.train.max_epochs);
      detail::maybe_get(t, "patience", cfg.train.patience);
      detail::maybe_get(t, "augmentation", cfg.train.augmentation);
      detail::maybe_get(t, "validation_fraction", cfg.train.validation_fraction);
      detail::maybe_get(t, "learning_rate", cfg.train.adam.learning_rate);
      detail::maybe_get(t, "dropout_keep", cfg.train.dropout_keep);
      if (t.contains("activation"))
        cfg.train.activation = parse_activation(t.at("activation"));
      cfg.train_fraction = 1.0 - cfg.train.validation_fraction;
      if (j.contains("train_fraction")) detail::maybe_get(j, "train_fraction", cfg.train_fraction);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON (" + path + "): " + e.what());
  }
  return config_from_json(j);
}

/// The fully-resolved configuration written into every report sidecar.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["pipeline"] = pipeline_name(cfg.pipeline);
  j["vocab_sizes"] = cfg.vocab_sizes;
  j["k_values"] = cfg.k_values;
  j["metrics"] = cfg.metrics;
  j["kernels"] = cfg.kernels;
  j["svm_c"] = cfg.svm_c;
  j["svm_gamma"] = cfg.svm_gamma;
  j["svm_max_iters"] = cfg.svm_max_iters;
  j["kmeans_max_iters"] = cfg.kmeans_max_iters;
  j["kmeans_tolerance"] = cfg.kmeans_tolerance;
  j["descriptor_cap"] = cfg.descriptor_cap;
  j["train_fraction"] = cfg.train_fraction;
  j["seed"] = cfg.seed;
  j["data"] = cfg.data_dir;
  j["test"] = cfg.test_dir;
  j["train"] = {{"batch_size", cfg.train.batch_size},
                {"max_epochs", cfg.train.max_epochs},
                {"patience", cfg.train.patience},
                {"augmentation", cfg.train.augmentation},
                {"validation_fraction", cfg.train.validation_fraction},
                {"learning_rate", cfg.train.adam.learning_rate},
                {"dropout_keep", cfg.train.dropout_keep},
                {"activation", activation_name(cfg.train.activation)}};
  return j;
}

}  // namespace signbench

#endif  // SIGNBENCH_CONFIG_HPP
