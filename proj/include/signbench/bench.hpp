#ifndef SIGNBENCH_BENCH_HPP
#define SIGNBENCH_BENCH_HPP

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "signbench/config.hpp"
#include "signbench/dataset.hpp"
#include "signbench/features.hpp"
#include "signbench/knn.hpp"
#include "signbench/report.hpp"
#include "signbench/svm.hpp"

namespace signbench {

/// Train/validation (and optional test) splits feeding a pipeline run.
struct BenchData {
  LabeledDataset train, val, test;
  bool has_test = false;

  std::size_t class_count() const { return train.class_count(); }
};

/// Loads cfg.data_dir, applies the stratified split, and loads the held-out
/// test directory when given (class names must agree).
inline BenchData load_bench_data(const ExperimentConfig& cfg) {
  BenchData data;
  LabeledDataset full = load_dataset(cfg.data_dir);
  auto parts = split(full, cfg.train_fraction, SeededRng(cfg.seed, 11));
  data.train = std::move(parts.first);
  data.val = std::move(parts.second);
  if (!cfg.test_dir.empty()) {
    data.test = load_dataset(cfg.test_dir);
    if (data.test.class_names != data.train.class_names)
      throw DataError("test set classes do not match training set classes");
    data.has_test = true;
  }
  return data;
}

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(bool verbose) : verbose_(verbose) {}
  void done(const std::string& what) {
    auto now = std::chrono::steady_clock::now();
    double secs = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    if (verbose_) std::printf("[signbench] %-46s %8.2f s\n", what.c_str(), secs);
  }

 private:
  bool verbose_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline std::vector<DescriptorSet<float>> extract_all(const LabeledDataset& ds) {
  std::vector<DescriptorSet<float>> sets(ds.size());
  parallel_for(0, ds.size(), 2, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      sets[i] = extract_image_descriptors(ds.images[i], i);
  });
  return sets;
}

// Flat histogram matrix (images × vocab.k) for a descriptor-set list.
inline std::vector<float> encode_all(const std::vector<DescriptorSet<float>>& sets,
                                     const Vocabulary<float>& vocab) {
  std::vector<float> out(sets.size() * vocab.k);
  parallel_for(0, sets.size(), 4, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto hist = encode_histogram(sets[i], vocab);
      std::copy(hist.frequencies.begin(), hist.frequencies.end(), out.begin() + i * vocab.k);
    }
  });
  return out;
}

inline std::vector<std::string> to_names(const std::vector<std::size_t>& values) {
  std::vector<std::string> names;
  for (auto v : values) names.push_back(std::to_string(v));
  return names;
}

}  // namespace detail

/// BOVW features for one vocabulary size, built strictly from the training
/// split: the vocabulary never sees validation or test descriptors.
struct BovwFeatures {
  Vocabulary<float> vocab;
  std::vector<float> train_hists, val_hists, test_hists;  // n × vocab.k
};

inline BovwFeatures build_bovw_features(const std::vector<DescriptorSet<float>>& train_sets,
                                        const std::vector<DescriptorSet<float>>& val_sets,
                                        const std::vector<DescriptorSet<float>>& test_sets,
                                        std::size_t vocab_size, const ExperimentConfig& cfg,
                                        std::size_t vocab_index) {
  SeededRng root(cfg.seed, 0);
  BovwFeatures f;
  auto pooled =
      pool_descriptors(train_sets, cfg.descriptor_cap, root.substream(100 + 4 * vocab_index));
  KmeansOptions opts;
  opts.max_iters = cfg.kmeans_max_iters;
  opts.tolerance = cfg.kmeans_tolerance;
  f.vocab = kmeans_fit(pooled, kDescriptorDim, vocab_size, opts,
                       root.substream(101 + 4 * vocab_index));
  f.train_hists = detail::encode_all(train_sets, f.vocab);
  f.val_hists = detail::encode_all(val_sets, f.vocab);
  if (!test_sets.empty()) f.test_hists = detail::encode_all(test_sets, f.vocab);
  return f;
}

// --------------------------------------------------------------------------
// KNN grid (vocabulary sizes × k values × metrics)
// --------------------------------------------------------------------------

inline ExperimentReport run_knn_grid(const ExperimentConfig& cfg, const BenchData& data) {
  detail::StageTimer timer(cfg.verbose);
  ExperimentReport report;
  report.resolved_config = config_to_json(cfg);

  auto train_sets = detail::extract_all(data.train);
  auto val_sets = detail::extract_all(data.val);
  std::vector<DescriptorSet<float>> test_sets;
  if (data.has_test) test_sets = detail::extract_all(data.test);
  timer.done("descriptor extraction");

  std::vector<DistanceMetric> metrics;
  for (const auto& m : cfg.metrics) metrics.push_back(parse_metric(m));

  // One table per metric (rows = k, columns = vocabulary size).
  std::vector<AccuracyTable> val_tables(metrics.size()), test_tables(metrics.size());
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    for (auto* t : {&val_tables[m], &test_tables[m]}) {
      t->row_label = "k";
      t->row_names = detail::to_names(cfg.k_values);
      t->col_names = detail::to_names(cfg.vocab_sizes);
      t->cells.assign(cfg.k_values.size() * cfg.vocab_sizes.size(), 0.0);
    }
    val_tables[m].name = "knn_" + metrics[m].name();
    test_tables[m].name = "knn_" + metrics[m].name() + "_test";
  }

  double best_acc = -1.0;
  std::vector<int> best_predictions;
  for (std::size_t v = 0; v < cfg.vocab_sizes.size(); ++v) {
    auto feats = build_bovw_features(train_sets, val_sets, test_sets, cfg.vocab_sizes[v], cfg, v);
    timer.done("vocab " + std::to_string(cfg.vocab_sizes[v]) + " fit+encode");

    KnnModel<float> model;
    model.dim = feats.vocab.k;
    model.refs = feats.train_hists;
    model.labels = data.train.labels;

    for (std::size_t m = 0; m < metrics.size(); ++m) {
      for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki) {
        std::size_t k = cfg.k_values[ki];
        double acc =
            knn_evaluate(model, feats.val_hists, data.val.labels, k, metrics[m]);
        val_tables[m].cell(ki, v) = acc;
        if (acc > best_acc) {
          best_acc = acc;
          std::vector<int> preds(data.val.size());
          parallel_for(0, preds.size(), 16, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i)
              preds[i] = knn_predict(model, feats.val_hists.data() + i * model.dim, k,
                                     metrics[m]);
          });
          best_predictions = std::move(preds);
        }
        if (data.has_test)
          test_tables[m].cell(ki, v) =
              knn_evaluate(model, feats.test_hists, data.test.labels, k, metrics[m]);
        timer.done("knn " + metrics[m].name() + " k=" + std::to_string(k) + " vocab=" +
                   std::to_string(cfg.vocab_sizes[v]));
      }
    }
  }

  for (std::size_t m = 0; m < metrics.size(); ++m) {
    report.tables.push_back(val_tables[m]);
    if (data.has_test) report.tables.push_back(test_tables[m]);

    Curve curve;
    curve.name = "knn_accuracy_" + metrics[m].name();
    curve.x_label = "vocabulary size";
    curve.y_label = "validation accuracy";
    for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki) {
      CurveSeries s;
      s.name = "k=" + std::to_string(cfg.k_values[ki]);
      for (std::size_t v = 0; v < cfg.vocab_sizes.size(); ++v) {
        s.xs.push_back(double(cfg.vocab_sizes[v]));
        s.ys.push_back(val_tables[m].cell(ki, v));
      }
      curve.series.push_back(std::move(s));
    }
    report.curves.push_back(std::move(curve));
  }

  if (!best_predictions.empty())
    report.confusions.emplace_back(
        "knn_confusion",
        confusion_matrix(best_predictions, data.val.labels, data.class_count(),
                         data.train.class_names));
  return report;
}

// --------------------------------------------------------------------------
// SVM grid (vocabulary sizes × kernels, one OVA model per cell)
// --------------------------------------------------------------------------

inline ExperimentReport run_svm_grid(const ExperimentConfig& cfg, const BenchData& data) {
  detail::StageTimer timer(cfg.verbose);
  ExperimentReport report;
  report.resolved_config = config_to_json(cfg);

  auto train_sets = detail::extract_all(data.train);
  auto val_sets = detail::extract_all(data.val);
  std::vector<DescriptorSet<float>> test_sets;
  if (data.has_test) test_sets = detail::extract_all(data.test);
  timer.done("descriptor extraction");

  AccuracyTable val_table, test_table;
  for (auto* t : {&val_table, &test_table}) {
    t->row_label = "kernel";
    t->row_names = cfg.kernels;
    t->col_names = detail::to_names(cfg.vocab_sizes);
    t->cells.assign(cfg.kernels.size() * cfg.vocab_sizes.size(), 0.0);
  }
  val_table.name = "svm";
  test_table.name = "svm_test";

  SvmTrainOptions opt;
  opt.c = cfg.svm_c;
  opt.max_iters = cfg.svm_max_iters;

  double best_acc = -1.0;
  std::vector<int> best_predictions;
  for (std::size_t v = 0; v < cfg.vocab_sizes.size(); ++v) {
    auto feats = build_bovw_features(train_sets, val_sets, test_sets, cfg.vocab_sizes[v], cfg, v);
    timer.done("vocab " + std::to_string(cfg.vocab_sizes[v]) + " fit+encode");

    for (std::size_t kk = 0; kk < cfg.kernels.size(); ++kk) {
      KernelSpec kernel = KernelSpec::parse(cfg.kernels[kk]);
      kernel.gamma = cfg.svm_gamma;
      auto model = ova_train(feats.train_hists.data(), data.train.labels, feats.vocab.k,
                             data.class_count(), kernel, opt);
      double acc = ova_evaluate(model, feats.val_hists, data.val.labels);
      val_table.cell(kk, v) = acc;
      if (acc > best_acc) {
        best_acc = acc;
        std::vector<int> preds(data.val.size());
        parallel_for(0, preds.size(), 16, [&](std::size_t lo, std::size_t hi) {
          for (std::size_t i = lo; i < hi; ++i)
            preds[i] = ova_predict(model, feats.val_hists.data() + i * model.dim);
        });
        best_predictions = std::move(preds);
      }
      if (data.has_test)
        test_table.cell(kk, v) = ova_evaluate(model, feats.test_hists, data.test.labels);
      timer.done("svm " + cfg.kernels[kk] + " vocab=" + std::to_string(cfg.vocab_sizes[v]));
    }
  }

  report.tables.push_back(val_table);
  if (data.has_test) report.tables.push_back(test_table);

  Curve curve;
  curve.name = "svm_accuracy";
  curve.x_label = "vocabulary size";
  curve.y_label = "validation accuracy";
  for (std::size_t kk = 0; kk < cfg.kernels.size(); ++kk) {
    CurveSeries s;
    s.name = cfg.kernels[kk];
    for (std::size_t v = 0; v < cfg.vocab_sizes.size(); ++v) {
      s.xs.push_back(double(cfg.vocab_sizes[v]));
      s.ys.push_back(val_table.cell(kk, v));
    }
    curve.series.push_back(std::move(s));
  }
  report.curves.push_back(std::move(curve));

  if (!best_predictions.empty())
    report.confusions.emplace_back(
        "svm_confusion",
        confusion_matrix(best_predictions, data.val.labels, data.class_count(),
                         data.train.class_names));
  return report;
}

// --------------------------------------------------------------------------
// Proposed CNN run
// --------------------------------------------------------------------------

struct CnnRunResult {
  ExperimentReport report;
  NetworkSpec spec;
  TrainingHistory history;
  std::vector<Tensor<float>> best_weights;
};

inline CnnRunResult run_cnn(const ExperimentConfig& cfg, const BenchData& data) {
  detail::StageTimer timer(cfg.verbose);
  CnnRunResult result;
  result.report.resolved_config = config_to_json(cfg);

  result.spec =
      build_proposed_network(data.class_count(), cfg.train.activation, cfg.train.dropout_keep);
  Network<float> net(result.spec, SeededRng(cfg.seed, 7));

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  if (cfg.verbose) {
    std::printf("[signbench] cnn training: %zu train / %zu val images, %zu classes\n",
                data.train.size(), data.val.size(), data.class_count());
  }
  auto train_result = train(net, data.train.images, data.train.labels, data.val.images,
                            data.val.labels, tc);
  result.history = train_result.history;
  result.best_weights = train_result.best_weights;
  timer.done("cnn training (" + std::to_string(result.history.epochs.size()) + " epochs)");

  auto [train_acc, train_loss] = evaluate(net, data.train.images, data.train.labels,
                                          cfg.train.batch_size);
  auto [val_acc, val_loss] = evaluate(net, data.val.images, data.val.labels,
                                      cfg.train.batch_size);
  AccuracyTable metrics;
  metrics.name = "cnn_metrics";
  metrics.row_label = "split";
  metrics.row_names = {"training", "validation"};
  metrics.col_names = {"accuracy", "loss"};
  metrics.cells = {train_acc, train_loss, val_acc, val_loss};

  const LabeledDataset& eval_set = data.has_test ? data.test : data.val;
  if (data.has_test) {
    auto [test_acc, test_loss] = evaluate(net, data.test.images, data.test.labels,
                                          cfg.train.batch_size);
    metrics.row_names.push_back("testing");
    metrics.cells.push_back(test_acc);
    metrics.cells.push_back(test_loss);
  }
  result.report.tables.push_back(std::move(metrics));
  timer.done("cnn evaluation");

  Curve acc_curve, loss_curve;
  acc_curve.name = "cnn_accuracy";
  acc_curve.x_label = "epoch";
  acc_curve.y_label = "accuracy";
  loss_curve.name = "cnn_loss";
  loss_curve.x_label = "epoch";
  loss_curve.y_label = "loss";
  CurveSeries ta{"train", {}, {}}, va{"validation", {}, {}};
  CurveSeries tl{"train", {}, {}}, vl{"validation", {}, {}};
  for (const auto& e : result.history.epochs) {
    ta.xs.push_back(double(e.epoch));
    ta.ys.push_back(e.train_acc);
    va.xs.push_back(double(e.epoch));
    va.ys.push_back(e.val_acc);
    tl.xs.push_back(double(e.epoch));
    tl.ys.push_back(e.train_loss);
    vl.xs.push_back(double(e.epoch));
    vl.ys.push_back(e.val_loss);
  }
  acc_curve.series = {ta, va};
  loss_curve.series = {tl, vl};
  result.report.curves.push_back(std::move(acc_curve));
  result.report.curves.push_back(std::move(loss_curve));

  auto preds = predict(net, eval_set.images, cfg.train.batch_size);
  result.report.confusions.emplace_back(
      "cnn_confusion",
      confusion_matrix(preds, eval_set.labels, data.class_count(), data.train.class_names));
  return result;
}

}  // namespace signbench

#endif  // SIGNBENCH_BENCH_HPP
