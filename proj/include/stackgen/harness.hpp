#pragma once

#include <string>

#include "stackgen/config.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/experiment.hpp"
#include "stackgen/fetch.hpp"

namespace stackgen {

inline FetchOptions fetch_options_for(const ExperimentConfig& config) {
  FetchOptions options;
  if (config.cache_dir) options.cache_dir = *config.cache_dir;
  return options;
}

// Datasets with a configured path are read from it; the rest come from the
// checksum-pinned cache. The schema is the configured file or the built-in
// one of the same name.
inline DatasetLoader make_dataset_loader(const ExperimentConfig& config, FetchOptions options) {
  return [sources = config.sources, options = std::move(options)](const std::string& name) {
    const auto it = sources.find(name);
    const DataSource src = it == sources.end() ? DataSource{} : it->second;
    const auto schema = src.schema ? load_schema_file(*src.schema) : builtin_schema(name);
    const auto path = src.path ? *src.path : fetch_dataset(name, options).path;
    return load_dataset_file(name, path, schema);
  };
}

}  // namespace stackgen
