#pragma once

// Experiment configuration. Plain text, one `key = value` per line, `#`
// comments. A `[section]` line prefixes the keys that follow with
// `section.`; `[]` clears the prefix.
//
//   datasets = pima, wdbc, statlog-heart
//   k        = 10
//   seed     = 42
//   roster   = logistic, naive_bayes, ...        (report rows, in order)
//   strict   = false
//
//   [models.<learner>]      any learner hyperparameter, see registry.hpp
//   [ensembles.bagging]     B, base
//   [ensembles.boosting]    T, weak, error_floor
//   [ensembles.stacking]    bases, meta, internal_folds, naive
//   [output]                dir, formats (csv, md), roc
//   [data]                  cache, <dataset>.path, <dataset>.schema
//
// Unknown keys are rejected.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stackgen/error.hpp"
#include "stackgen/hash.hpp"
#include "stackgen/params.hpp"
#include "stackgen/registry.hpp"

namespace stackgen {

struct DataSource {
  std::optional<std::filesystem::path> path;
  std::optional<std::filesystem::path> schema;
};

struct ExperimentConfig {
  std::vector<std::string> datasets = {"pima", "wdbc", "statlog-heart"};
  std::size_t k = 10;
  std::uint64_t seed = 42;
  std::vector<std::string> roster = default_roster();
  bool strict = false;
  Params learner_params;  // models.* and ensembles.* entries
  std::filesystem::path output_dir = "results";
  std::vector<std::string> formats = {"csv", "md"};
  bool roc = false;
  std::optional<std::filesystem::path> cache_dir;
  std::map<std::string, DataSource> sources;

  bool stacking_naive() const { return learner_params.get_bool("ensembles.stacking.naive", false); }
  void set_stacking_naive(bool on) { learner_params.set("ensembles.stacking.naive", on ? "true" : "false"); }

  void validate() const {
    if (k < 2) throw ConfigError("k must be at least 2");
    if (datasets.empty()) throw ConfigError("no datasets selected");
    if (roster.empty()) throw ConfigError("roster is empty");
    for (const auto& d : datasets)
      if (std::count(datasets.begin(), datasets.end(), d) > 1) throw ConfigError("dataset '" + d + "' is listed twice");
    for (const auto& id : roster) {
      if (std::find(known_learner_ids().begin(), known_learner_ids().end(), id) == known_learner_ids().end())
        throw ConfigError("roster: unknown learner '" + id + "'");
      if (std::count(roster.begin(), roster.end(), id) > 1) throw ConfigError("roster lists '" + id + "' twice");
    }
    for (const auto& f : formats)
      if (f != "csv" && f != "md") throw ConfigError("output.formats: unknown format '" + f + "'");
    const LearnerRegistry registry(learner_params);
    for (const auto& id : roster) registry.make(id);
  }

  // Settings that determine report content, one per line in a fixed order.
  // Output and cache locations are left out.
  std::string canonical() const {
    std::ostringstream out;
    const auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
      return s;
    };
    out << "datasets=" << join(datasets) << '\n';
    out << "k=" << k << '\n';
    out << "seed=" << seed << '\n';
    out << "roster=" << join(roster) << '\n';
    out << "strict=" << (strict ? "true" : "false") << '\n';
    for (const auto& [key, value] : learner_params.entries()) out << key << '=' << value << '\n';
    for (const auto& [name, src] : sources)
      if (src.schema) out << "data." << name << ".schema=" << sha256_file(*src.schema) << '\n';
    return out.str();
  }

  std::string hash() const { return sha256_hex(canonical()); }
};

namespace detail {

inline bool known_learner(const std::string& id) {
  return std::find(known_learner_ids().begin(), known_learner_ids().end(), id) != known_learner_ids().end();
}

inline void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  Params one;
  one.set(key, value);
  if (key == "datasets") {
    cfg.datasets = split_list(value);
  } else if (key == "k") {
    const auto k = one.get_int(key, 0);
    if (k < 2) throw ConfigError("k must be at least 2");
    cfg.k = static_cast<std::size_t>(k);
  } else if (key == "seed") {
    const auto s = one.get_int(key, 0);
    if (s < 0) throw ConfigError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "roster") {
    cfg.roster = split_list(value);
  } else if (key == "strict") {
    cfg.strict = one.get_bool(key, false);
  } else if (key.rfind("models.", 0) == 0) {
    const auto rest = key.substr(7);
    const auto dot = rest.find('.');
    if (dot == std::string::npos || dot + 1 == rest.size()) throw ConfigError("expected models.<learner>.<param>, got '" + key + "'");
    if (!known_learner(rest.substr(0, dot))) throw ConfigError("unknown learner in '" + key + "'");
    cfg.learner_params.set(key, value);
  } else if (key.rfind("ensembles.", 0) == 0) {
    static const std::map<std::string, std::vector<std::string>> allowed = {
        {"bagging", {"B", "base"}},
        {"boosting", {"T", "weak", "error_floor"}},
        {"stacking", {"bases", "meta", "internal_folds", "naive"}},
    };
    const auto rest = key.substr(10);
    const auto dot = rest.find('.');
    const auto it = dot == std::string::npos ? allowed.end() : allowed.find(rest.substr(0, dot));
    if (it == allowed.end() || std::find(it->second.begin(), it->second.end(), rest.substr(dot + 1)) == it->second.end())
      throw ConfigError("unknown ensemble setting '" + key + "'");
    cfg.learner_params.set(key, value);
  } else if (key == "output.dir") {
    cfg.output_dir = value;
  } else if (key == "output.formats") {
    cfg.formats = split_list(value);
  } else if (key == "output.roc") {
    cfg.roc = one.get_bool(key, false);
  } else if (key == "data.cache") {
    cfg.cache_dir = std::filesystem::path(value);
  } else if (key.rfind("data.", 0) == 0 && key.size() > 5) {
    const auto rest = key.substr(5);
    const auto dot = rest.rfind('.');
    const auto field = dot == std::string::npos ? std::string() : rest.substr(dot + 1);
    if (dot == 0 || (field != "path" && field != "schema")) throw ConfigError("unknown data setting '" + key + "'");
    auto& src = cfg.sources[rest.substr(0, dot)];
    (field == "path" ? src.path : src.schema) = std::filesystem::path(value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

}  // namespace detail

// Relative data paths are resolved against `base_dir`.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto text = trim(std::string_view(line).substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError("unterminated section header", line_no);
      section = std::string(trim(text.substr(1, text.size() - 2)));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    auto key = std::string(trim(text.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!section.empty()) key = section + "." + key;
    try {
      detail::apply_config_key(cfg, key, std::string(trim(text.substr(eq + 1))));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!base_dir.empty()) {
    for (auto& [name, src] : cfg.sources) {
      if (src.path && src.path->is_relative()) src.path = base_dir / *src.path;
      if (src.schema && src.schema->is_relative()) src.schema = base_dir / *src.schema;
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

}  // namespace stackgen
