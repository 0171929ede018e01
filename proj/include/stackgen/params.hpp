#pragma once

#include <charconv>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stackgen/error.hpp"

namespace stackgen {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// String-keyed hyperparameters with typed accessors. Values are kept as text
// so a config file, a CLI flag and a test can all feed the same structure.
class Params {
 public:
  Params() = default;
  Params(std::initializer_list<std::pair<const std::string, std::string>> init) : values_(init) {}

  Params& set(const std::string& key, std::string value) {
    values_[key] = std::move(value);
    return *this;
  }

  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    if (!parse_double(it->second, v)) throw ConfigError("parameter '" + key + "' is not a number: " + it->second);
    return v;
  }

  long long get_int(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto text = trim(it->second);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw ConfigError("parameter '" + key + "' is not an integer: " + it->second);
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto v = trim(it->second);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("parameter '" + key + "' is not a boolean: " + it->second);
  }

  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : split_list(it->second);
  }

  // Entries whose key starts with `prefix.`, with the prefix stripped.
  Params scoped(std::string_view prefix) const {
    Params out;
    const std::string p = std::string(prefix) + ".";
    for (const auto& [k, v] : values_)
      if (k.size() > p.size() && k.compare(0, p.size(), p) == 0) out.values_[k.substr(p.size())] = v;
    return out;
  }

  // Values from `overrides` win.
  Params merged(const Params& overrides) const {
    Params out = *this;
    for (const auto& [k, v] : overrides.values_) out.values_[k] = v;
    return out;
  }

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  friend bool operator==(const Params&, const Params&) = default;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace stackgen
