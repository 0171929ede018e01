#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stackgen/error.hpp"
#include "stackgen/matrix.hpp"
#include "stackgen/params.hpp"

namespace stackgen {

// Binary-labelled tabular data. Label 1 is the positive class (disease
// present, malignant).
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::string positive_label_name = "positive";

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t n_features() const noexcept { return features.cols(); }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features = features.select_rows(indices);
    out.labels.reserve(indices.size());
    for (const auto i : indices) out.labels.push_back(labels.at(i));
    out.feature_names = feature_names;
    out.positive_label_name = positive_label_name;
    return out;
  }

  // Throws when any invariant is broken. `allow_missing` admits NaN cells,
  // which are legal only before imputation.
  void validate(bool allow_missing = false) const {
    if (features.rows() != labels.size())
      throw Error("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                  std::to_string(labels.size()) + " labels");
    if (feature_names.size() != features.cols()) throw Error("dataset feature name count does not match columns");
    for (const int y : labels)
      if (y != 0 && y != 1) throw Error("dataset label outside {0,1}: " + std::to_string(y));
    for (const double v : features.data()) {
      if (std::isinf(v) || (!allow_missing && std::isnan(v))) throw Error("dataset contains a non-finite value");
    }
  }
};

inline Dataset make_dataset(Matrix features, std::vector<int> labels) {
  Dataset d;
  d.feature_names.reserve(features.cols());
  for (std::size_t c = 0; c < features.cols(); ++c) d.feature_names.push_back("x" + std::to_string(c));
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.validate(true);
  return d;
}

enum class ColumnType { integer, real, binary, categorical };

inline std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::integer: return "integer";
    case ColumnType::real: return "real";
    case ColumnType::binary: return "binary";
    case ColumnType::categorical: return "categorical";
  }
  return "real";
}

inline ColumnType parse_column_type(std::string_view s) {
  if (s == "integer" || s == "int") return ColumnType::integer;
  if (s == "real" || s == "float" || s == "double") return ColumnType::real;
  if (s == "binary") return ColumnType::binary;
  if (s == "categorical" || s == "categorical-coded") return ColumnType::categorical;
  throw ConfigError("unknown column type '" + std::string(s) + "'");
}

struct ColumnSpec {
  std::string name;
  ColumnType type = ColumnType::real;
  std::optional<double> missing_sentinel;
  bool dropped = false;
};

struct DatasetSchema {
  std::string name;
  std::vector<ColumnSpec> columns;
  std::string label;
  std::map<std::string, int> coding;
  std::string positive_label_name = "positive";
  bool header = false;
  bool whitespace_delimited = false;
  char delimiter = ',';

  const ColumnSpec* find(std::string_view column) const {
    for (const auto& c : columns)
      if (c.name == column) return &c;
    return nullptr;
  }

  std::vector<const ColumnSpec*> feature_columns() const {
    std::vector<const ColumnSpec*> out;
    for (const auto& c : columns)
      if (c.name != label && !c.dropped) out.push_back(&c);
    return out;
  }

  // Missing-value sentinel per retained feature, in feature order.
  std::vector<std::optional<double>> feature_sentinels() const {
    std::vector<std::optional<double>> out;
    for (const auto* c : feature_columns()) out.push_back(c->missing_sentinel);
    return out;
  }

  void validate() const {
    if (columns.empty()) throw ConfigError("schema '" + name + "' declares no columns");
    const auto labels = std::count_if(columns.begin(), columns.end(), [&](const auto& c) { return c.name == label; });
    if (labels != 1) throw ConfigError("schema '" + name + "' must contain exactly one label column named '" + label + "'");
    for (std::size_t i = 0; i < columns.size(); ++i)
      for (std::size_t j = i + 1; j < columns.size(); ++j)
        if (columns[i].name == columns[j].name) throw ConfigError("schema '" + name + "' repeats column '" + columns[i].name + "'");
    if (coding.empty()) throw ConfigError("schema '" + name + "' has an empty label coding");
    for (const auto& [token, value] : coding)
      if (value != 0 && value != 1) throw ConfigError("schema '" + name + "' codes label '" + token + "' outside {0,1}");
    if (feature_columns().empty()) throw ConfigError("schema '" + name + "' has no feature columns");
  }
};

namespace detail {

inline ColumnSpec column(std::string name, ColumnType type, std::optional<double> sentinel = std::nullopt) {
  return ColumnSpec{std::move(name), type, sentinel, false};
}

inline DatasetSchema pima_schema() {
  DatasetSchema s;
  s.name = "pima";
  // Zero is physiologically impossible for these five measurements and marks
  // a missing value. A zero pregnancy count is legitimate.
  s.columns = {column("pregnancies", ColumnType::integer),
               column("glucose", ColumnType::integer, 0.0),
               column("diastolic_bp", ColumnType::integer, 0.0),
               column("skin_fold", ColumnType::integer, 0.0),
               column("insulin", ColumnType::integer, 0.0),
               column("bmi", ColumnType::real, 0.0),
               column("pedigree", ColumnType::real),
               column("age", ColumnType::integer),
               column("class", ColumnType::binary)};
  s.label = "class";
  s.coding = {{"0", 0}, {"1", 1}};
  s.positive_label_name = "diabetes";
  return s;
}

inline DatasetSchema wdbc_schema() {
  DatasetSchema s;
  s.name = "wdbc";
  s.columns.push_back(ColumnSpec{"id", ColumnType::integer, std::nullopt, true});
  s.columns.push_back(column("diagnosis", ColumnType::categorical));
  for (const char* stat : {"mean", "se", "worst"})
    for (const char* feature : {"radius", "texture", "perimeter", "area", "smoothness", "compactness", "concavity",
                                "concave_points", "symmetry", "fractal_dimension"})
      s.columns.push_back(column(std::string(feature) + "_" + stat, ColumnType::real));
  s.label = "diagnosis";
  s.coding = {{"M", 1}, {"B", 0}};
  s.positive_label_name = "malignant";
  return s;
}

inline DatasetSchema statlog_heart_schema() {
  DatasetSchema s;
  s.name = "statlog-heart";
  s.columns = {column("age", ColumnType::integer),
               column("sex", ColumnType::binary),
               column("chest_pain", ColumnType::categorical),
               column("resting_bp", ColumnType::integer),
               column("cholesterol", ColumnType::integer),
               column("fasting_blood_sugar", ColumnType::binary),
               column("resting_ecg", ColumnType::categorical),
               column("max_heart_rate", ColumnType::integer),
               column("exercise_angina", ColumnType::binary),
               column("oldpeak", ColumnType::real),
               column("slope", ColumnType::categorical),
               column("major_vessels", ColumnType::integer),
               column("thal", ColumnType::categorical),
               column("presence", ColumnType::categorical)};
  s.label = "presence";
  s.coding = {{"1", 0}, {"2", 1}};
  s.positive_label_name = "heart disease";
  s.whitespace_delimited = true;
  return s;
}

inline std::vector<std::string> split_fields(std::string_view line, const DatasetSchema& schema) {
  if (!schema.whitespace_delimited) return split_list(line, schema.delimiter);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

inline std::vector<std::string> builtin_schema_names() { return {"pima", "wdbc", "statlog-heart"}; }

inline DatasetSchema builtin_schema(std::string_view name) {
  if (name == "pima") return detail::pima_schema();
  if (name == "wdbc") return detail::wdbc_schema();
  if (name == "statlog-heart" || name == "heart") return detail::statlog_heart_schema();
  throw ConfigError("no built-in schema named '" + std::string(name) + "'");
}

// Plain-text schema format, one `key = value` per line, `#` comments:
//
//   name      = my-data
//   columns   = id, age, score, outcome
//   types     = integer, integer, real, categorical
//   label     = outcome
//   coding    = yes:1, no:0
//   sentinels = score:0
//   drop      = id
//   header    = true
//   delimiter = ,            (or the word "whitespace")
//   positive  = disease
inline DatasetSchema parse_schema(std::istream& in) {
  Params kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    kv.set(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
  }
  static const std::vector<std::string> known = {"name",   "columns", "types",     "label",   "coding",
                                                 "header", "drop",    "sentinels", "delimiter", "positive"};
  for (const auto& [key, value] : kv.entries())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown schema key '" + key + "'");

  DatasetSchema s;
  s.name = kv.get_string("name", "custom");
  s.header = kv.get_bool("header", false);
  s.label = kv.get_string("label", "");
  s.positive_label_name = kv.get_string("positive", "positive");
  const auto delim = kv.get_string("delimiter", ",");
  if (delim == "whitespace") {
    s.whitespace_delimited = true;
  } else if (delim.size() == 1) {
    s.delimiter = delim[0];
  } else {
    throw ConfigError("schema delimiter must be one character or 'whitespace'");
  }

  const auto names = kv.get_list("columns", {});
  const auto types = kv.get_list("types", {});
  if (!types.empty() && types.size() != names.size())
    throw ConfigError("schema lists " + std::to_string(names.size()) + " columns but " + std::to_string(types.size()) + " types");
  for (std::size_t i = 0; i < names.size(); ++i)
    s.columns.push_back(ColumnSpec{names[i], types.empty() ? ColumnType::real : parse_column_type(types[i]), std::nullopt, false});

  for (const auto& entry : kv.get_list("coding", {})) {
    const auto colon = entry.rfind(':');
    if (colon == std::string::npos) throw ConfigError("coding entry '" + entry + "' must be token:0 or token:1");
    double v = 0;
    if (!parse_double(entry.substr(colon + 1), v)) throw ConfigError("coding entry '" + entry + "' has a non-numeric code");
    s.coding[std::string(trim(entry.substr(0, colon)))] = static_cast<int>(v);
  }
  for (const auto& entry : kv.get_list("sentinels", {})) {
    const auto colon = entry.rfind(':');
    double v = 0;
    if (colon == std::string::npos || !parse_double(entry.substr(colon + 1), v))
      throw ConfigError("sentinel entry '" + entry + "' must be column:value");
    const auto col = std::string(trim(entry.substr(0, colon)));
    auto it = std::find_if(s.columns.begin(), s.columns.end(), [&](const auto& c) { return c.name == col; });
    if (it == s.columns.end()) throw ConfigError("sentinel names undeclared column '" + col + "'");
    it->missing_sentinel = v;
  }
  for (const auto& col : kv.get_list("drop", {})) {
    auto it = std::find_if(s.columns.begin(), s.columns.end(), [&](const auto& c) { return c.name == col; });
    if (it == s.columns.end()) throw ConfigError("drop names undeclared column '" + col + "'");
    it->dropped = true;
  }
  s.validate();
  return s;
}

inline DatasetSchema load_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema file " + path.string());
  return parse_schema(in);
}

// Missing cells ("?" or empty) and schema sentinels are kept as read: the
// former become NaN, the latter keep their sentinel value. impute_missing
// resolves both.
inline Dataset parse_csv(std::istream& in, const DatasetSchema& schema) {
  schema.validate();
  Dataset out;
  out.positive_label_name = schema.positive_label_name;
  const auto features = schema.feature_columns();
  for (const auto* c : features) out.feature_names.push_back(c->name);

  std::vector<std::size_t> feature_pos;
  std::size_t label_pos = 0;
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    const auto& c = schema.columns[i];
    if (c.name == schema.label) {
      label_pos = i;
    } else if (!c.dropped) {
      feature_pos.push_back(i);
    }
  }

  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = detail::split_fields(line, schema);
    if (header_pending) {
      header_pending = false;
      if (fields.size() != schema.columns.size())
        throw ParseError("header has " + std::to_string(fields.size()) + " fields, schema declares " +
                             std::to_string(schema.columns.size()),
                         line_no);
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] != schema.columns[i].name)
          throw ParseError("header column '" + fields[i] + "' does not match schema column '" + schema.columns[i].name + "'",
                           line_no);
      continue;
    }
    if (fields.size() != schema.columns.size())
      throw ParseError("expected " + std::to_string(schema.columns.size()) + " fields, found " + std::to_string(fields.size()),
                       line_no);

    const auto& token = fields[label_pos];
    const auto code = schema.coding.find(token);
    if (code == schema.coding.end()) throw CodingError("line " + std::to_string(line_no) + ": unknown label value '" + token + "'");
    out.labels.push_back(code->second);

    for (const auto pos : feature_pos) {
      const auto& field = fields[pos];
      const auto& spec = schema.columns[pos];
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!field.empty() && field != "?") {
        if (!parse_double(field, v) || !std::isfinite(v))
          throw ParseError("column '" + spec.name + "': not a number: '" + field + "'", line_no);
        if ((spec.type == ColumnType::integer || spec.type == ColumnType::categorical) && v != std::floor(v))
          throw ParseError("column '" + spec.name + "': expected an integer, found '" + field + "'", line_no);
        if (spec.type == ColumnType::binary && v != 0.0 && v != 1.0 && !(spec.missing_sentinel && *spec.missing_sentinel == v))
          throw ParseError("column '" + spec.name + "': expected 0 or 1, found '" + field + "'", line_no);
      }
      values.push_back(v);
    }
  }
  if (out.labels.empty()) throw ParseError("no data rows");

  out.features = Matrix(out.labels.size(), features.size());
  std::copy(values.begin(), values.end(), out.features.data().begin());
  out.validate(/*allow_missing=*/true);
  return out;
}

inline Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open data file " + path.string());
  try {
    return parse_csv(in, schema);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  } catch (const CodingError& e) {
    throw CodingError(path.string() + ": " + e.what());
  }
}

}  // namespace stackgen
