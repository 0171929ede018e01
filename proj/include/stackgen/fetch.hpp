#pragma once

// Dataset acquisition with pinned SHA-256 checksums. Lookup order for each
// file: the cache directory, a local mirror directory, then HTTP(S).
// Nothing that fails its checksum is ever written to the cache.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>

#include "stackgen/error.hpp"
#include "stackgen/hash.hpp"

namespace stackgen {

struct DatasetFile {
  std::string name;      // built-in schema name
  std::string filename;  // name inside the cache and mirror directories
  std::string url;
  std::string sha256;
};

// Checksums pin the files shipped in the source tree's data/ directory.
inline const std::vector<DatasetFile>& dataset_manifest() {
  static const std::vector<DatasetFile> files = {
      {"pima", "pima-indians-diabetes.data",
       "https://archive.ics.uci.edu/ml/machine-learning-databases/pima-indians-diabetes/pima-indians-diabetes.data",
       "33e704cdafa8769a75728e4658dcce5bc1da1ce36174603687fe545f46e39394"},
      {"wdbc", "wdbc.data", "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/wdbc.data",
       "a906fc5c0c27c1ff5abb84df814dd29743c24a7eedd6cac902d2b68a171cf41d"},
      {"statlog-heart", "heart.dat", "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/heart/heart.dat",
       "f39a9dc4896f59d607909123d2d3d8863e8ab4f0150e00edb974bd41abd9220a"},
  };
  return files;
}

inline const DatasetFile& manifest_entry(std::string_view name) {
  const std::string_view canonical = name == "heart" ? "statlog-heart" : name;
  for (const auto& f : dataset_manifest())
    if (f.name == canonical) return f;
  throw ConfigError("no dataset named '" + std::string(name) + "' in the download manifest");
}

// STACKGEN_CACHE_DIR, else $XDG_CACHE_HOME/stackgen, else ~/.cache/stackgen.
inline std::filesystem::path default_cache_dir() {
  if (const char* dir = std::getenv("STACKGEN_CACHE_DIR"); dir && *dir) return dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::filesystem::path(xdg) / "stackgen";
  if (const char* home = std::getenv("HOME"); home && *home) return std::filesystem::path(home) / ".cache" / "stackgen";
  return ".stackgen-cache";
}

// STACKGEN_MIRROR_DIR, else the source tree's data/ directory when the build
// recorded one.
inline std::optional<std::filesystem::path> default_mirror_dir() {
  if (const char* dir = std::getenv("STACKGEN_MIRROR_DIR"); dir && *dir) return std::filesystem::path(dir);
#ifdef STACKGEN_DATA_DIR
  if (std::filesystem::is_directory(STACKGEN_DATA_DIR)) return std::filesystem::path(STACKGEN_DATA_DIR);
#endif
  return std::nullopt;
}

struct FetchOptions {
  std::filesystem::path cache_dir = default_cache_dir();
  std::optional<std::filesystem::path> mirror_dir = default_mirror_dir();
  bool allow_network = true;
  std::map<std::string, std::string> url_overrides;  // dataset name -> URL
};

enum class FetchSource { cache, mirror, network };

struct FetchResult {
  std::string name;
  std::filesystem::path path;
  FetchSource source = FetchSource::cache;
};

namespace detail {

inline void write_atomically(const std::filesystem::path& target, std::string_view bytes) {
  std::filesystem::create_directories(target.parent_path());
  auto tmp = target;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

// Returns the body on HTTP 200, otherwise nullopt with `error` set.
inline std::optional<std::string> http_get(const std::string& url, std::string& error) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    error = "malformed URL";
    return std::nullopt;
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const auto origin = url.substr(0, path_start);
  const auto path = path_start == std::string::npos ? std::string("/") : url.substr(path_start);
  httplib::Client client(origin);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(30, 0);
  client.set_follow_location(true);
  const auto res = client.Get(path);
  if (!res) {
    error = httplib::to_string(res.error());
    return std::nullopt;
  }
  if (res->status != 200) {
    error = "HTTP status " + std::to_string(res->status);
    return std::nullopt;
  }
  return res->body;
}

}  // namespace detail

inline FetchResult fetch_dataset(std::string_view name, const FetchOptions& options) {
  const auto& entry = manifest_entry(name);
  const auto target = options.cache_dir / entry.filename;
  if (std::filesystem::exists(target)) {
    const auto digest = sha256_file(target);
    if (digest != entry.sha256)
      throw ChecksumError("cached file " + target.string() + " fails its checksum (sha256 " + digest + ", expected " + entry.sha256 +
                          "); delete it and fetch again");
    return {entry.name, target, FetchSource::cache};
  }

  if (options.mirror_dir) {
    const auto source = *options.mirror_dir / entry.filename;
    if (std::filesystem::exists(source)) {
      const auto bytes = read_file_bytes(source);
      const auto digest = sha256_hex(bytes);
      if (digest != entry.sha256)
        throw ChecksumError("mirror file " + source.string() + " fails its checksum (sha256 " + digest + ", expected " + entry.sha256 + ")");
      detail::write_atomically(target, bytes);
      return {entry.name, target, FetchSource::mirror};
    }
  }

  const auto override_it = options.url_overrides.find(entry.name);
  const auto& url = override_it == options.url_overrides.end() ? entry.url : override_it->second;
  std::string error = "network access disabled";
  std::optional<std::string> body;
  if (options.allow_network) body = detail::http_get(url, error);
  if (!body)
    throw Error("could not download '" + entry.name + "' from " + url + " (" + error + "); place the file manually at " + target.string());
  const auto digest = sha256_hex(*body);
  if (digest != entry.sha256)
    throw ChecksumError("download of '" + entry.name + "' from " + url + " fails its checksum (sha256 " + digest + ", expected " +
                        entry.sha256 + "); refusing the file");
  detail::write_atomically(target, *body);
  return {entry.name, target, FetchSource::network};
}

inline std::vector<FetchResult> fetch_datasets(const std::vector<std::string>& names, const FetchOptions& options) {
  std::vector<FetchResult> out;
  for (const auto& n : names) out.push_back(fetch_dataset(n, options));
  return out;
}

}  // namespace stackgen
