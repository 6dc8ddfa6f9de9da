// signbench: benchmark CLI comparing a BOVW pipeline (SIFT-style features,
// k-means vocabulary, KNN / kernel SVM) against a from-scratch CNN on
// directory-per-class image datasets.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "signbench/bench.hpp"
#include "signbench/descriptor_io.hpp"
#include "signbench/synthetic.hpp"

namespace fs = std::filesystem;
using namespace signbench;

namespace {

struct CommonFlags {
  std::string data_dir, test_dir, config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--data", flags.data_dir, "dataset root (directory per class)");
  cmd->add_option("--test", flags.test_dir, "held-out test dataset root");
  cmd->add_option("--config", flags.config_path, "experiment config JSON");
  cmd->add_option("--seed", flags.seed, "root seed (overrides config)")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--out", flags.out_dir, "output directory")->required();
  cmd->add_option("--threads", flags.threads, "worker thread cap (0 = hardware)");
}

ExperimentConfig resolve_config(const CommonFlags& flags, Pipeline pipeline) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config(flags.config_path);
  cfg.pipeline = pipeline;
  if (!flags.data_dir.empty()) cfg.data_dir = flags.data_dir;
  if (!flags.test_dir.empty()) cfg.test_dir = flags.test_dir;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (cfg.data_dir.empty()) throw ConfigError("no dataset: pass --data or set it in the config");
  ThreadPool::instance().set_threads(flags.threads);
  cfg.validate();
  return cfg;
}

void print_best_cells(const ExperimentReport& report) {
  for (const auto& t : report.tables) {
    double best = -1;
    std::size_t br = 0, bc = 0;
    for (std::size_t r = 0; r < t.row_names.size(); ++r)
      for (std::size_t c = 0; c < t.col_names.size(); ++c)
        if (t.cell(r, c) > best) {
          best = t.cell(r, c);
          br = r;
          bc = c;
        }
    std::printf("[signbench] %-22s best %s=%s vocab=%s value=%.5f\n", t.name.c_str(),
                t.row_label.c_str(), t.row_names[br].c_str(), t.col_names[bc].c_str(), best);
  }
}

int run_extract(const CommonFlags& flags) {
  ThreadPool::instance().set_threads(flags.threads);
  LabeledDataset ds = load_dataset(flags.data_dir);
  auto sets = detail::extract_all(ds);
  fs::create_directories(flags.out_dir);
  auto path = (fs::path(flags.out_dir) / "descriptors.sdsc").string();
  save_descriptor_sets(sets, ds.labels, path);
  std::size_t total = 0;
  for (const auto& s : sets) total += s.count();
  std::printf("[signbench] extracted %zu descriptors from %zu images -> %s\n", total, ds.size(),
              path.c_str());
  return 0;
}

int run_vocab(const CommonFlags& flags, const std::string& descriptors_path, std::size_t size) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config(flags.config_path);
  if (flags.seed_set) cfg.seed = flags.seed;
  ThreadPool::instance().set_threads(flags.threads);

  std::vector<DescriptorSet<float>> sets;
  if (!descriptors_path.empty()) {
    sets = load_descriptor_sets(descriptors_path).first;
  } else if (!flags.data_dir.empty()) {
    sets = detail::extract_all(load_dataset(flags.data_dir));
  } else {
    throw ConfigError("vocab needs --data or --descriptors");
  }

  SeededRng root(cfg.seed, 0);
  auto pooled = pool_descriptors(sets, cfg.descriptor_cap, root.substream(100));
  KmeansOptions opts;
  opts.max_iters = cfg.kmeans_max_iters;
  opts.tolerance = cfg.kmeans_tolerance;
  auto vocab = kmeans_fit(pooled, kDescriptorDim, size, opts, root.substream(101));

  fs::create_directories(flags.out_dir);
  auto path = (fs::path(flags.out_dir) / "vocabulary.bovw").string();
  save_vocabulary(vocab, path);
  std::printf("[signbench] k=%zu vocabulary, objective %.4f after %zu iterations -> %s\n",
              vocab.k, vocab.objective, vocab.iterations_run, path.c_str());
  return 0;
}

int run_grid(const CommonFlags& flags, Pipeline pipeline) {
  auto cfg = resolve_config(flags, pipeline);
  BenchData data = load_bench_data(cfg);
  std::string test_note = data.has_test ? " / " + std::to_string(data.test.size()) + " test" : "";
  std::printf("[signbench] %s: %zu train / %zu val%s images, %zu classes\n",
              pipeline_name(cfg.pipeline).c_str(), data.train.size(), data.val.size(),
              test_note.c_str(), data.class_count());

  ExperimentReport report;
  if (pipeline == Pipeline::knn_grid)
    report = run_knn_grid(cfg, data);
  else
    report = run_svm_grid(cfg, data);
  render_report(report, flags.out_dir);
  print_best_cells(report);
  std::printf("[signbench] report written to %s\n", flags.out_dir.c_str());
  return 0;
}

int run_cnn_train(const CommonFlags& flags) {
  auto cfg = resolve_config(flags, Pipeline::cnn);
  BenchData data = load_bench_data(cfg);
  auto result = run_cnn(cfg, data);
  render_report(result.report, flags.out_dir);

  Network<float> net(result.spec, SeededRng(cfg.seed, 7));
  net.restore_weights(result.best_weights);
  save_checkpoint(net, (fs::path(flags.out_dir) / "checkpoint.sbnn").string());
  save_history_csv(result.history, (fs::path(flags.out_dir) / "history.csv").string());

  print_best_cells(result.report);
  std::printf("[signbench] best epoch %zu of %zu; report written to %s\n",
              result.history.best_epoch, result.history.stopped_epoch, flags.out_dir.c_str());
  return 0;
}

int run_rerender(const std::string& in_path, const std::string& out_dir) {
  std::ifstream is(in_path);
  if (!is) throw DataError("cannot open report: " + in_path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("report is not valid JSON (" + in_path + "): " + e.what());
  }
  render_report(report_from_json(j), out_dir);
  std::printf("[signbench] re-rendered %s -> %s\n", in_path.c_str(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BOVW vs from-scratch CNN image classification benchmark"};
  app.require_subcommand(1);

  CommonFlags extract_flags, vocab_flags, knn_flags, svm_flags, cnn_flags;
  std::string descriptors_path, report_in, report_out;
  std::size_t vocab_size = 100;

  auto* extract = app.add_subcommand("extract", "compute descriptors for a dataset");
  extract->add_option("--data", extract_flags.data_dir, "dataset root")->required();
  extract->add_option("--out", extract_flags.out_dir, "output directory")->required();
  extract->add_option("--threads", extract_flags.threads, "worker thread cap");

  auto* vocab = app.add_subcommand("vocab", "fit a k-means visual vocabulary");
  vocab->add_option("--data", vocab_flags.data_dir, "dataset root");
  vocab->add_option("--descriptors", descriptors_path, "descriptor cache from `extract`");
  vocab->add_option("--size", vocab_size, "vocabulary size (k)")->required();
  vocab->add_option("--config", vocab_flags.config_path, "experiment config JSON");
  vocab->add_option("--seed", vocab_flags.seed, "root seed")
      ->each([&](const std::string&) { vocab_flags.seed_set = true; });
  vocab->add_option("--out", vocab_flags.out_dir, "output directory")->required();
  vocab->add_option("--threads", vocab_flags.threads, "worker thread cap");

  auto* knn = app.add_subcommand("knn-grid", "run the KNN accuracy grid");
  add_common(knn, knn_flags);
  auto* svm = app.add_subcommand("svm-grid", "run the SVM kernel grid");
  add_common(svm, svm_flags);
  auto* cnn = app.add_subcommand("cnn-train", "train and evaluate the proposed CNN");
  add_common(cnn, cnn_flags);

  auto* report = app.add_subcommand("report", "re-render a saved report.json");
  report->add_option("--in", report_in, "report.json path")->required();
  report->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed()) return run_extract(extract_flags);
    if (vocab->parsed()) return run_vocab(vocab_flags, descriptors_path, vocab_size);
    if (knn->parsed()) return run_grid(knn_flags, Pipeline::knn_grid);
    if (svm->parsed()) return run_grid(svm_flags, Pipeline::svm_grid);
    if (cnn->parsed()) return run_cnn_train(cnn_flags);
    if (report->parsed()) return run_rerender(report_in, report_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
