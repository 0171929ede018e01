#pragma once

// Report rendering. report.csv holds full-precision percentages and a `#`
// stamp header; report.md holds one table per dataset and group with
// percentages to one decimal. Undefined values are "—" in Markdown and empty
// cells in CSV.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stackgen/error.hpp"
#include "stackgen/experiment.hpp"
#include "stackgen/metrics.hpp"
#include "stackgen/params.hpp"
#include "stackgen/registry.hpp"

namespace stackgen {

inline constexpr const char* kUndefined = "—";

// Shortest text that reads back to the same double.
inline std::string format_exact(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, end);
}

inline std::string format_percent_1dp(const Rate& r) {
  if (!r) return kUndefined;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * *r);
  return buf;
}

inline std::string format_percent_exact(const Rate& r) { return r ? format_exact(100.0 * *r) : std::string(); }

inline const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> cols = {"dataset",       "model",    "label",       "specificity",
                                                "sensitivity",   "accuracy", "auc",         "ppv",
                                                "npv",           "fpr",      "n_evaluated", "fold_accuracy",
                                                "meta_training_accuracy", "leakage_free"};
  return cols;
}

inline std::string render_csv(const Report& report) {
  if (report.rows.empty()) throw Error("report has no rows");
  std::ostringstream out;
  out << "# stackgen " << report.version << '\n';
  out << "# seed=" << report.seed << " k=" << report.k << " config_sha256=" << report.config_sha256 << '\n';
  for (const auto& d : report.datasets)
    out << "# dataset=" << d.name << " samples=" << d.samples << " features=" << d.features << " negatives=" << d.negatives
        << " positives=" << d.positives << " majority_rate=" << format_exact(d.majority_rate)
        << " sha256=" << (d.sha256.empty() ? "-" : d.sha256) << '\n';
  const auto& cols = report_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : report.rows) {
    if (r.label.find(',') != std::string::npos) throw Error("report label contains a comma: " + r.label);
    out << r.dataset << ',' << r.model << ',' << r.label << ',' << format_percent_exact(r.mean.specificity) << ','
        << format_percent_exact(r.mean.sensitivity) << ',' << format_percent_exact(r.mean.accuracy) << ','
        << format_percent_exact(r.mean.auc) << ',' << format_percent_exact(r.mean.ppv) << ',' << format_percent_exact(r.mean.npv)
        << ',' << format_percent_exact(r.mean.fpr) << ',' << r.evaluated() << ',';
    for (std::size_t f = 0; f < r.folds.size(); ++f) out << (f ? ";" : "") << format_percent_exact(r.folds[f].metrics.accuracy);
    out << ',' << format_percent_exact(r.meta_training_accuracy) << ',';
    if (r.leakage_free) out << (*r.leakage_free ? "true" : "false");
    out << '\n';
  }
  return out.str();
}

inline std::string render_markdown(const Report& report) {
  if (report.rows.empty()) throw Error("report has no rows");
  std::ostringstream out;
  out << "# Cross-validated results\n\n";
  out << "stackgen " << report.version << ", seed " << report.seed << ", " << report.k << "-fold stratified CV, config sha256 `"
      << report.config_sha256 << "`. Values are percentages, means over folds.\n";

  std::vector<std::string> order;
  for (const auto& r : report.rows)
    if (std::find(order.begin(), order.end(), r.dataset) == order.end()) order.push_back(r.dataset);

  const auto& base = default_base_roster();
  for (const auto& name : order) {
    out << "\n## " << name << "\n\n";
    if (const auto* d = report.summary(name))
      out << d->samples << " samples, " << d->features << " features, " << d->positives << " positive / " << d->negatives
          << " negative, majority rate " << format_percent_1dp(d->majority_rate) << "%.\n";
    for (const bool ensembles : {false, true}) {
      std::vector<const ReportRow*> rows;
      for (const auto& r : report.rows) {
        const bool is_base = std::find(base.begin(), base.end(), r.model) != base.end();
        if (r.dataset == name && is_base != ensembles) rows.push_back(&r);
      }
      if (rows.empty()) continue;
      out << '\n' << (ensembles ? "### Ensembles and other models" : "### Base learners") << "\n\n";
      out << "| Model | Specificity | Sensitivity | Accuracy | AUC |\n";
      out << "|---|---:|---:|---:|---:|\n";
      for (const auto* r : rows)
        out << "| " << r->label << " | " << format_percent_1dp(r->mean.specificity) << " | " << format_percent_1dp(r->mean.sensitivity)
            << " | " << format_percent_1dp(r->mean.accuracy) << " | " << format_percent_1dp(r->mean.auc) << " |\n";
    }
    for (const auto& r : report.rows) {
      if (r.dataset != name || !r.meta_training_accuracy) continue;
      out << "\n" << r.label << ": meta-learner training accuracy " << format_percent_1dp(r.meta_training_accuracy)
          << "%, out-of-fold audit " << (r.leakage_free && *r.leakage_free ? "clean" : "found leakage") << ".\n";
    }
  }
  return out.str();
}

inline std::string render_roc_csv(const ReportRow& row) {
  const auto curve = roc_curve(row.oof_scores, row.actual);
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (const auto& p : curve.points) out << format_exact(p.fpr) << ',' << format_exact(p.tpr) << '\n';
  return out.str();
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace detail

// Writes the requested formats ("csv", "md") into `dir`, plus
// roc/<dataset>__<model>.csv for every row when `roc` is set.
inline std::vector<std::filesystem::path> render_report(const Report& report, const std::filesystem::path& dir,
                                                        const std::vector<std::string>& formats, bool roc = false) {
  if (report.rows.empty()) throw Error("report has no rows");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
  std::vector<std::filesystem::path> written;
  for (const auto& f : formats) {
    if (f == "csv") {
      written.push_back(dir / "report.csv");
      detail::write_text(written.back(), render_csv(report));
    } else if (f == "md") {
      written.push_back(dir / "report.md");
      detail::write_text(written.back(), render_markdown(report));
    } else {
      throw ConfigError("unknown report format '" + f + "'");
    }
  }
  if (roc) {
    std::filesystem::create_directories(dir / "roc", ec);
    if (ec) throw Error("cannot create " + (dir / "roc").string());
    for (const auto& r : report.rows) {
      if (r.oof_scores.empty()) continue;
      written.push_back(dir / "roc" / (r.dataset + "__" + r.model + ".csv"));
      detail::write_text(written.back(), render_roc_csv(r));
    }
  }
  return written;
}

namespace detail {

inline Rate parse_percent(const std::string& cell, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  double v = 0;
  if (!parse_double(cell, v)) throw ParseError("not a number: " + cell, line);
  return v / 100.0;
}

inline std::string stamp_value(const std::string& line, const std::string& key) {
  const auto pos = line.find(" " + key + "=");
  if (pos == std::string::npos) return {};
  const auto start = pos + key.size() + 2;
  return line.substr(start, line.find(' ', start) - start);
}

}  // namespace detail

// Reads a report.csv back. Per-sample scores are not stored there, so ROC
// dumps cannot be regenerated from the result.
inline Report parse_report_csv(std::istream& in) {
  Report report;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# stackgen ", 0) == 0) report.version = line.substr(11);
      if (line.rfind("# seed=", 0) == 0) {
        report.seed = std::stoull(detail::stamp_value(line, "seed"));
        report.k = std::stoul(detail::stamp_value(line, "k"));
        report.config_sha256 = detail::stamp_value(line, "config_sha256");
      }
      if (line.rfind("# dataset=", 0) == 0) {
        DatasetSummary d;
        d.name = detail::stamp_value(line, "dataset");
        d.samples = std::stoul(detail::stamp_value(line, "samples"));
        d.features = std::stoul(detail::stamp_value(line, "features"));
        d.negatives = std::stoul(detail::stamp_value(line, "negatives"));
        d.positives = std::stoul(detail::stamp_value(line, "positives"));
        parse_double(detail::stamp_value(line, "majority_rate"), d.majority_rate);
        d.sha256 = detail::stamp_value(line, "sha256");
        if (d.sha256 == "-") d.sha256.clear();
        report.datasets.push_back(d);
      }
      continue;
    }
    const auto cells = split_list(line);
    if (!header_seen) {
      if (cells != report_csv_columns()) throw ParseError("unexpected report header", line_no);
      header_seen = true;
      continue;
    }
    if (cells.size() != report_csv_columns().size())
      throw ParseError("expected " + std::to_string(report_csv_columns().size()) + " fields, found " + std::to_string(cells.size()),
                       line_no);
    ReportRow r;
    r.dataset = cells[0];
    r.model = cells[1];
    r.label = cells[2];
    r.mean.specificity = detail::parse_percent(cells[3], line_no);
    r.mean.sensitivity = detail::parse_percent(cells[4], line_no);
    r.mean.accuracy = detail::parse_percent(cells[5], line_no);
    r.mean.auc = detail::parse_percent(cells[6], line_no);
    r.mean.ppv = detail::parse_percent(cells[7], line_no);
    r.mean.npv = detail::parse_percent(cells[8], line_no);
    r.mean.fpr = detail::parse_percent(cells[9], line_no);
    r.mean.tpr = r.mean.sensitivity;
    for (const auto& acc : split_list(cells[11], ';')) {
      FoldResult f;
      f.metrics.accuracy = detail::parse_percent(acc, line_no);
      r.folds.push_back(f);
    }
    r.meta_training_accuracy = detail::parse_percent(cells[12], line_no);
    if (!cells[13].empty()) r.leakage_free = cells[13] == "true";
    report.rows.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("report.csv has no header row");
  return report;
}

inline Report load_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return parse_report_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  }
}

}  // namespace stackgen
