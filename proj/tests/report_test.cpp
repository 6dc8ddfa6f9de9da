#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "signbench/config.hpp"
#include "signbench/report.hpp"

using namespace signbench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void compare_trees(const fs::path& a, const fs::path& b) {
  std::vector<std::string> rel_a, rel_b;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a).string());
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b).string());
  std::sort(rel_a.begin(), rel_a.end());
  std::sort(rel_b.begin(), rel_b.end());
  ASSERT_EQ(rel_a, rel_b);
  for (const auto& rel : rel_a) ASSERT_EQ(slurp(a / rel), slurp(b / rel)) << rel;
}

ExperimentReport sample_report() {
  ExperimentReport report;
  AccuracyTable t;
  t.name = "knn_manhattan";
  t.row_label = "k";
  t.row_names = {"1", "3", "5"};
  t.col_names = {"50", "75", "100"};
  t.cells = {0.413215, 0.495579, 0.52443, 0.426710, 0.505817, 0.539321, 0.462541, 0.526291, 0.541182};
  report.tables.push_back(t);

  Curve c;
  c.name = "knn_accuracy_manhattan";
  c.x_label = "vocabulary size";
  c.y_label = "validation accuracy";
  c.series = {{"k=1", {50, 75, 100}, {0.41, 0.50, 0.52}},
              {"k=3", {50, 75, 100}, {0.43, 0.51, 0.54}}};
  report.curves.push_back(c);

  ConfusionMatrix cm;
  cm.class_count = 2;
  cm.class_names = {"stop", "yield"};
  cm.counts = {8, 2, 1, 9};
  report.confusions.emplace_back("knn_confusion", cm);
  report.resolved_config = {{"pipeline", "knn-grid"}, {"seed", 42}};
  return report;
}

}  // namespace

TEST(ConfusionMatrix, CountsAndAccuracy) {
  auto perfect = confusion_matrix({0, 1, 2, 1}, {0, 1, 2, 1}, 3);
  EXPECT_EQ(perfect.trace(), 4u);
  EXPECT_EQ(perfect.total(), 4u);
  EXPECT_EQ(perfect.accuracy(), 1.0);
  EXPECT_EQ(perfect.at(1, 1), 2u);
  EXPECT_EQ(perfect.at(0, 1), 0u);

  auto all_zero = confusion_matrix({0, 0, 0}, {0, 1, 2}, 3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 1; c < 3; ++c) EXPECT_EQ(all_zero.at(r, c), 0u);
  EXPECT_EQ(all_zero.at(1, 0), 1u);

  EXPECT_THROW(confusion_matrix({3}, {0}, 3), Error);
  EXPECT_THROW(confusion_matrix({0}, {0, 1}, 3), Error);
}

TEST(ConfusionMatrix, HandCountedOracle) {
  // Ten samples tallied by hand.
  std::vector<int> labels = {0, 0, 0, 1, 1, 1, 1, 2, 2, 2};
  std::vector<int> preds = {0, 1, 0, 1, 1, 2, 1, 2, 0, 2};
  auto cm = confusion_matrix(preds, labels, 3);
  // Row 0: two right, one called class 1.
  EXPECT_EQ(cm.at(0, 0), 2u);
  EXPECT_EQ(cm.at(0, 1), 1u);
  EXPECT_EQ(cm.at(0, 2), 0u);
  // Row 1: three right, one called class 2.
  EXPECT_EQ(cm.at(1, 1), 3u);
  EXPECT_EQ(cm.at(1, 2), 1u);
  // Row 2: two right, one called class 0.
  EXPECT_EQ(cm.at(2, 2), 2u);
  EXPECT_EQ(cm.at(2, 0), 1u);
  EXPECT_EQ(cm.accuracy(), 0.7);
  // Row sums equal per-class counts.
  for (std::size_t r = 0; r < 3; ++r) {
    std::uint64_t row = 0;
    for (std::size_t c = 0; c < 3; ++c) row += cm.at(r, c);
    std::uint64_t expect = 0;
    for (int l : labels)
      if (l == int(r)) ++expect;
    EXPECT_EQ(row, expect);
  }
}

TEST(Csv, TableFormatExact) {
  AccuracyTable t;
  t.name = "svm";
  t.row_label = "kernel";
  t.row_names = {"rbf", "chi2"};
  t.col_names = {"50", "75"};
  t.cells = {0.30712, 0.365752, 0.489065, 0.571894};
  auto path = (fs::temp_directory_path() / "sb_table.csv").string();
  write_table_csv(t, path);
  EXPECT_EQ(slurp(path),
            "kernel,50,75\r\n"
            "rbf,0.30712,0.365752\r\n"
            "chi2,0.489065,0.571894\r\n");
  fs::remove(path);
}

TEST(Csv, QuotingPerRfc4180) {
  AccuracyTable t;
  t.name = "odd";
  t.row_label = "label,with,commas";
  t.row_names = {"quote\"inside"};
  t.col_names = {"plain"};
  t.cells = {1.0};
  auto path = (fs::temp_directory_path() / "sb_quote.csv").string();
  write_table_csv(t, path);
  EXPECT_EQ(slurp(path),
            "\"label,with,commas\",plain\r\n"
            "\"quote\"\"inside\",1\r\n");
  fs::remove(path);
}

TEST(Csv, ConfusionMatrixFile) {
  ConfusionMatrix cm;
  cm.class_count = 2;
  cm.class_names = {"a", "b"};
  cm.counts = {3, 1, 0, 4};
  auto path = (fs::temp_directory_path() / "sb_conf.csv").string();
  write_confusion_csv(cm, path);
  EXPECT_EQ(slurp(path),
            "true\\pred,a,b\r\n"
            "a,3,1\r\n"
            "b,0,4\r\n");
  fs::remove(path);
}

TEST(Svg, PlotsAreDeterministicAndWellFormed) {
  auto report = sample_report();
  auto svg1 = svg_line_plot(report.curves[0]);
  auto svg2 = svg_line_plot(report.curves[0]);
  EXPECT_EQ(svg1, svg2);
  EXPECT_NE(svg1.find("<polyline"), std::string::npos);
  EXPECT_NE(svg1.find("</svg>"), std::string::npos);
  EXPECT_NE(svg1.find("vocabulary size"), std::string::npos);

  auto heat = svg_heatmap(report.confusions[0].second, "knn_confusion");
  EXPECT_NE(heat.find("<rect"), std::string::npos);
  EXPECT_NE(heat.find("stop"), std::string::npos);
}

TEST(Render, ByteIdenticalReRender) {
  auto report = sample_report();
  auto dir_a = fs::temp_directory_path() / "sb_render_a";
  auto dir_b = fs::temp_directory_path() / "sb_render_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  render_report(report, dir_a.string());
  render_report(report, dir_b.string());
  compare_trees(dir_a, dir_b);

  EXPECT_TRUE(fs::exists(dir_a / "tables" / "knn_manhattan.csv"));
  EXPECT_TRUE(fs::exists(dir_a / "curves" / "knn_accuracy_manhattan.svg"));
  EXPECT_TRUE(fs::exists(dir_a / "confusion" / "knn_confusion.csv"));
  EXPECT_TRUE(fs::exists(dir_a / "config.json"));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST(Render, JsonRoundTripRegeneratesIdenticalFiles) {
  auto report = sample_report();
  auto json = report_to_json(report);
  auto restored = report_from_json(json);

  auto dir_a = fs::temp_directory_path() / "sb_regen_a";
  auto dir_b = fs::temp_directory_path() / "sb_regen_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  render_report(report, dir_a.string());
  render_report(restored, dir_b.string());
  compare_trees(dir_a, dir_b);
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST(Config, ParseDefaultsAndOverrides) {
  nlohmann::json j = {{"pipeline", "svm-grid"},
                      {"vocab_sizes", {10, 20}},
                      {"kernels", {"chi2"}},
                      {"seed", 9},
                      {"train", {{"batch_size", 16}, {"activation", "relu"}}}};
  auto cfg = config_from_json(j);
  EXPECT_EQ(cfg.pipeline, Pipeline::svm_grid);
  EXPECT_EQ(cfg.vocab_sizes, (std::vector<std::size_t>{10, 20}));
  EXPECT_EQ(cfg.kernels, (std::vector<std::string>{"chi2"}));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.train.batch_size, 16u);
  EXPECT_EQ(cfg.train.activation, ActivationKind::relu);
  // Defaults survive.
  EXPECT_EQ(cfg.k_values.size(), 9u);
  EXPECT_EQ(cfg.train.patience, 12u);
  EXPECT_EQ(cfg.train.adam.learning_rate, 0.0002);

  EXPECT_THROW(config_from_json({{"pipeline", "bogus"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"pipeline", "knn-grid"}, {"metrics", {"cosine"}}}),
               ConfigError);
  EXPECT_THROW(config_from_json({{"pipeline", "knn-grid"}, {"vocab_sizes", nlohmann::json::array()}}),
               ConfigError);

  // Round trip through the sidecar serialisation.
  auto j2 = config_to_json(cfg);
  auto cfg2 = config_from_json(j2);
  EXPECT_EQ(cfg2.pipeline, cfg.pipeline);
  EXPECT_EQ(cfg2.vocab_sizes, cfg.vocab_sizes);
  EXPECT_EQ(cfg2.train.batch_size, cfg.train.batch_size);
}
