#ifndef SIGNBENCH_REPORT_HPP
#define SIGNBENCH_REPORT_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "signbench/common.hpp"

namespace signbench {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::size_t class_count = 0;
  std::vector<std::uint64_t> counts;  // class_count × class_count
  std::vector<std::string> class_names;

  std::uint64_t& at(std::size_t truth, std::size_t pred) {
    return counts[truth * class_count + pred];
  }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * class_count + pred];
  }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto v : counts) t += v;
    return t;
  }
  std::uint64_t trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < class_count; ++i) t += at(i, i);
    return t;
  }
  double accuracy() const {
    std::uint64_t t = total();
    return t == 0 ? 0.0 : double(trace()) / double(t);
  }
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& predictions,
                                        const std::vector<int>& labels,
                                        std::size_t class_count,
                                        std::vector<std::string> class_names = {}) {
  if (predictions.size() != labels.size())
    throw Error("confusion_matrix: predictions/labels misaligned");
  ConfusionMatrix cm;
  cm.class_count = class_count;
  cm.counts.assign(class_count * class_count, 0);
  cm.class_names = std::move(class_names);
  if (cm.class_names.empty())
    for (std::size_t c = 0; c < class_count; ++c) cm.class_names.push_back(std::to_string(c));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int t = labels[i], p = predictions[i];
    if (t < 0 || p < 0 || std::size_t(t) >= class_count || std::size_t(p) >= class_count)
      throw Error("confusion_matrix: label " + std::to_string(t) + "/" + std::to_string(p) +
                  " outside " + std::to_string(class_count) + " classes");
    ++cm.at(std::size_t(t), std::size_t(p));
  }
  return cm;
}

/// Grid accuracies: one row per k value / kernel, one column per
/// vocabulary size.
struct AccuracyTable {
  std::string name;       // file stem
  std::string row_label;  // "k" or "kernel"
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;  // vocabulary sizes
  std::vector<double> cells;           // rows × cols

  double& cell(std::size_t r, std::size_t c) { return cells[r * col_names.size() + c]; }
  double cell(std::size_t r, std::size_t c) const { return cells[r * col_names.size() + c]; }
};

struct CurveSeries {
  std::string name;
  std::vector<double> xs, ys;
};

struct Curve {
  std::string name;  // file stem
  std::string x_label, y_label;
  std::vector<CurveSeries> series;
};

/// Everything a pipeline run produces. Wall-clock timings are intentionally
/// not part of this structure: report directories must be byte-identical
/// across reruns, so timings go to the console only.
struct ExperimentReport {
  std::vector<AccuracyTable> tables;
  std::vector<Curve> curves;
  std::vector<std::pair<std::string, ConfusionMatrix>> confusions;
  nlohmann::json resolved_config;  // config + seed sidecar content
};

// --------------------------------------------------------------------------
// CSV (RFC 4180: CRLF, '.' decimal, quoting only where needed)
// --------------------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::ofstream open_text(const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary: exact CRLF control
  if (!os) throw DataError("cannot open for writing: " + path);
  return os;
}

}  // namespace detail

inline void write_table_csv(const AccuracyTable& table, const std::string& path) {
  auto os = detail::open_text(path);
  os << detail::csv_field(table.row_label);
  for (const auto& c : table.col_names) os << ',' << detail::csv_field(c);
  os << "\r\n";
  for (std::size_t r = 0; r < table.row_names.size(); ++r) {
    os << detail::csv_field(table.row_names[r]);
    for (std::size_t c = 0; c < table.col_names.size(); ++c)
      os << ',' << format_sig(table.cell(r, c));
    os << "\r\n";
  }
  if (!os) throw DataError("failed writing table: " + path);
}

inline void write_curve_csv(const Curve& curve, const std::string& path) {
  auto os = detail::open_text(path);
  os << detail::csv_field(curve.x_label);
  for (const auto& s : curve.series) os << ',' << detail::csv_field(s.name);
  os << "\r\n";
  std::size_t rows = 0;
  for (const auto& s : curve.series) rows = std::max(rows, s.xs.size());
  for (std::size_t i = 0; i < rows; ++i) {
    bool wrote_x = false;
    std::string line;
    for (const auto& s : curve.series) {
      if (!wrote_x && i < s.xs.size()) {
        line = format_sig(s.xs[i]);
        wrote_x = true;
      }
    }
    os << line;
    for (const auto& s : curve.series) {
      os << ',';
      if (i < s.ys.size()) os << format_sig(s.ys[i]);
    }
    os << "\r\n";
  }
  if (!os) throw DataError("failed writing curve: " + path);
}

inline void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
  auto os = detail::open_text(path);
  os << "true\\pred";
  for (const auto& n : cm.class_names) os << ',' << detail::csv_field(n);
  os << "\r\n";
  for (std::size_t r = 0; r < cm.class_count; ++r) {
    os << detail::csv_field(cm.class_names[r]);
    for (std::size_t c = 0; c < cm.class_count; ++c) os << ',' << cm.at(r, c);
    os << "\r\n";
  }
  if (!os) throw DataError("failed writing confusion matrix: " + path);
}

// --------------------------------------------------------------------------
// Native SVG plots (line charts and confusion heatmaps), byte-stable.
// --------------------------------------------------------------------------

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[i % 10];
}

}  // namespace detail

inline std::string svg_line_plot(const Curve& curve, int width = 640, int height = 440) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : curve.series)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      xmin = std::min(xmin, s.xs[i]);
      xmax = std::max(xmax, s.xs[i]);
      ymin = std::min(ymin, s.ys[i]);
      ymax = std::max(ymax, s.ys[i]);
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double ml = 60, mr = 16, mt = 30, mb = 46;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::svg_num(width / 2.0) +
         "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         curve.name + "</text>\n";
  // Axes with five ticks each.
  svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (int t = 0; t <= 4; ++t) {
    double fx = xmin + (xmax - xmin) * t / 4.0;
    double fy = ymin + (ymax - ymin) * t / 4.0;
    svg += "<line x1=\"" + detail::svg_num(sx(fx)) + "\" y1=\"" + detail::svg_num(mt + ph) +
           "\" x2=\"" + detail::svg_num(sx(fx)) + "\" y2=\"" + detail::svg_num(mt + ph + 4) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::svg_num(sx(fx)) + "\" y=\"" + detail::svg_num(mt + ph + 16) +
           "\" text-anchor=\"middle\">" + format_sig(fx, 4) + "</text>\n";
    svg += "<line x1=\"" + detail::svg_num(ml - 4) + "\" y1=\"" + detail::svg_num(sy(fy)) +
           "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(sy(fy)) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" + detail::svg_num(sy(fy) + 4) +
           "\" text-anchor=\"end\">" + format_sig(fy, 4) + "</text>\n";
  }
  svg += "</g>\n";
  svg += "<rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) + "\" width=\"" +
         detail::svg_num(pw) + "\" height=\"" + detail::svg_num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" +
         detail::svg_num(double(height) - 8) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         curve.x_label + "</text>\n";
  svg += "<text x=\"14\" y=\"" + detail::svg_num(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 " +
         detail::svg_num(mt + ph / 2) + ")\">" + curve.y_label + "</text>\n";

  for (std::size_t si = 0; si < curve.series.size(); ++si) {
    const auto& s = curve.series[si];
    std::string points;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (i) points += ' ';
      points += detail::svg_num(sx(s.xs[i])) + "," + detail::svg_num(sy(s.ys[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(detail::series_color(si)) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    double ly = mt + 14 + 14 * double(si);
    svg += "<line x1=\"" + detail::svg_num(ml + 8) + "\" y1=\"" + detail::svg_num(ly - 4) +
           "\" x2=\"" + detail::svg_num(ml + 28) + "\" y2=\"" + detail::svg_num(ly - 4) +
           "\" stroke=\"" + detail::series_color(si) + "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + detail::svg_num(ml + 32) + "\" y=\"" + detail::svg_num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline std::string svg_heatmap(const ConfusionMatrix& cm, const std::string& title,
                               int cell_px = 0) {
  std::size_t n = cm.class_count;
  if (cell_px == 0) cell_px = n <= 10 ? 40 : 14;
  const int ml = 70, mt = 50;
  int width = ml + int(n) * cell_px + 20;
  int height = mt + int(n) * cell_px + 20;
  std::uint64_t peak = 1;
  for (auto v : cm.counts) peak = std::max(peak, v);

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::svg_num(width / 2.0) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         title + "</text>\n";
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double frac = double(cm.at(r, c)) / double(peak);
      int blue = 255 - int(std::lround(frac * 205.0));
      char color[8];
      std::snprintf(color, sizeof(color), "#%02x%02xff", blue, blue);
      svg += "<rect x=\"" + std::to_string(ml + int(c) * cell_px) + "\" y=\"" +
             std::to_string(mt + int(r) * cell_px) + "\" width=\"" + std::to_string(cell_px) +
             "\" height=\"" + std::to_string(cell_px) + "\" fill=\"" + color +
             "\" stroke=\"#cccccc\"/>\n";
      if (cell_px >= 24 && cm.at(r, c) > 0)
        svg += "<text x=\"" + std::to_string(ml + int(c) * cell_px + cell_px / 2) + "\" y=\"" +
               std::to_string(mt + int(r) * cell_px + cell_px / 2 + 4) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               std::to_string(cm.at(r, c)) + "</text>\n";
    }
  }
  if (cell_px >= 14) {
    for (std::size_t i = 0; i < n; ++i) {
      svg += "<text x=\"" + std::to_string(ml - 6) + "\" y=\"" +
             std::to_string(mt + int(i) * cell_px + cell_px / 2 + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
             cm.class_names[i] + "</text>\n";
      svg += "<text x=\"" + std::to_string(ml + int(i) * cell_px + cell_px / 2) + "\" y=\"" +
             std::to_string(mt - 6) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
             cm.class_names[i] + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

// --------------------------------------------------------------------------
// JSON round trip: report.json allows re-rendering the identical directory.
// --------------------------------------------------------------------------

inline nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["config"] = report.resolved_config;
  j["tables"] = nlohmann::json::array();
  for (const auto& t : report.tables)
    j["tables"].push_back({{"name", t.name},
                           {"row_label", t.row_label},
                           {"row_names", t.row_names},
                           {"col_names", t.col_names},
                           {"cells", t.cells}});
  j["curves"] = nlohmann::json::array();
  for (const auto& c : report.curves) {
    nlohmann::json series = nlohmann::json::array();
    for (const auto& s : c.series)
      series.push_back({{"name", s.name}, {"xs", s.xs}, {"ys", s.ys}});
    j["curves"].push_back(
        {{"name", c.name}, {"x_label", c.x_label}, {"y_label", c.y_label}, {"series", series}});
  }
  j["confusions"] = nlohmann::json::array();
  for (const auto& [name, cm] : report.confusions)
    j["confusions"].push_back({{"name", name},
                               {"class_count", cm.class_count},
                               {"class_names", cm.class_names},
                               {"counts", cm.counts}});
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport report;
  report.resolved_config = j.at("config");
  for (const auto& t : j.at("tables")) {
    AccuracyTable table;
    table.name = t.at("name");
    table.row_label = t.at("row_label");
    table.row_names = t.at("row_names").get<std::vector<std::string>>();
    table.col_names = t.at("col_names").get<std::vector<std::string>>();
    table.cells = t.at("cells").get<std::vector<double>>();
    report.tables.push_back(std::move(table));
  }
  for (const auto& c : j.at("curves")) {
    Curve curve;
    curve.name = c.at("name");
    curve.x_label = c.at("x_label");
    curve.y_label = c.at("y_label");
    for (const auto& s : c.at("series")) {
      CurveSeries series;
      series.name = s.at("name");
      series.xs = s.at("xs").get<std::vector<double>>();
      series.ys = s.at("ys").get<std::vector<double>>();
      curve.series.push_back(std::move(series));
    }
    report.curves.push_back(std::move(curve));
  }
  for (const auto& c : j.at("confusions")) {
    ConfusionMatrix cm;
    cm.class_count = c.at("class_count");
    cm.class_names = c.at("class_names").get<std::vector<std::string>>();
    cm.counts = c.at("counts").get<std::vector<std::uint64_t>>();
    report.confusions.emplace_back(c.at("name"), std::move(cm));
  }
  return report;
}

/// Writes tables/, curves/, confusion/ CSVs, SVG figures, the resolved
/// config sidecar and report.json. Re-rendering the same report is
/// byte-identical.
inline void render_report(const ExperimentReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "tables", ec);
  fs::create_directories(fs::path(out_dir) / "curves", ec);
  fs::create_directories(fs::path(out_dir) / "confusion", ec);
  if (ec) throw DataError("cannot create report directory: " + out_dir);

  for (const auto& t : report.tables)
    write_table_csv(t, (fs::path(out_dir) / "tables" / (t.name + ".csv")).string());
  for (const auto& c : report.curves) {
    write_curve_csv(c, (fs::path(out_dir) / "curves" / (c.name + ".csv")).string());
    auto os = detail::open_text((fs::path(out_dir) / "curves" / (c.name + ".svg")).string());
    os << svg_line_plot(c);
  }
  for (const auto& [name, cm] : report.confusions) {
    write_confusion_csv(cm, (fs::path(out_dir) / "confusion" / (name + ".csv")).string());
    auto os = detail::open_text((fs::path(out_dir) / "confusion" / (name + ".svg")).string());
    os << svg_heatmap(cm, name);
  }
  {
    auto os = detail::open_text((fs::path(out_dir) / "config.json").string());
    os << report.resolved_config.dump(2) << '\n';
  }
  {
    auto os = detail::open_text((fs::path(out_dir) / "report.json").string());
    os << report_to_json(report).dump(2) << '\n';
  }
}

}  // namespace signbench

#endif  // SIGNBENCH_REPORT_HPP
