#pragma once

// Cross-validated comparison of a learner roster on one or more datasets.
// For every dataset: one stratified fold plan, per-fold median imputation
// fitted on the training rows, every roster learner fitted per fold and
// scored on the held-out rows. Each fit gets the seed
// derive_seed(master, dataset, learner, fold).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/config.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/error.hpp"
#include "stackgen/hash.hpp"
#include "stackgen/metrics.hpp"
#include "stackgen/preprocess.hpp"
#include "stackgen/registry.hpp"
#include "stackgen/rng.hpp"
#include "stackgen/stacking.hpp"
#include "stackgen/version.hpp"

namespace stackgen {

struct LoadedDataset {
  std::string name;
  Dataset data;  // may contain NaN or sentinel values until imputation
  std::vector<std::optional<double>> sentinels;
  std::string sha256;  // of the source file, empty when not file-backed
};

using DatasetLoader = std::function<LoadedDataset(const std::string& name)>;

inline LoadedDataset load_dataset_file(const std::string& name, const std::filesystem::path& path, const DatasetSchema& schema) {
  LoadedDataset out;
  out.name = name;
  out.data = load_csv(path, schema);
  out.sentinels = schema.feature_sentinels();
  out.sha256 = sha256_file(path);
  return out;
}

struct FoldResult {
  std::size_t n_test = 0;
  ConfusionMatrix confusion;
  MetricsRecord metrics;
  std::optional<double> meta_training_accuracy;  // stacked models only
  std::optional<bool> leakage_free;              // stacked models only
};

struct ReportRow {
  std::string dataset;
  std::string model;
  std::string label;
  MetricsRecord mean;  // unweighted means over folds of each defined value
  std::vector<FoldResult> folds;
  std::vector<double> oof_scores;  // held-out probability per sample
  std::vector<int> actual;
  std::optional<double> meta_training_accuracy;
  std::optional<bool> leakage_free;

  std::size_t evaluated() const {
    std::size_t n = 0;
    for (const auto& f : folds) n += f.n_test;
    return n;
  }
};

struct DatasetSummary {
  std::string name;
  std::size_t samples = 0;
  std::size_t features = 0;
  std::size_t negatives = 0;
  std::size_t positives = 0;
  double majority_rate = 0.0;
  std::string sha256;
};

struct Report {
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::string config_sha256;
  std::vector<DatasetSummary> datasets;
  std::vector<ReportRow> rows;

  const ReportRow* find(const std::string& dataset, const std::string& model) const {
    for (const auto& r : rows)
      if (r.dataset == dataset && r.model == model) return &r;
    return nullptr;
  }
  const DatasetSummary* summary(const std::string& dataset) const {
    for (const auto& d : datasets)
      if (d.name == dataset) return &d;
    return nullptr;
  }
};

namespace detail {

inline Rate mean_defined(const std::vector<FoldResult>& folds, Rate MetricsRecord::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : folds) {
    if (const auto& v = f.metrics.*field) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline MetricsRecord mean_metrics(const std::vector<FoldResult>& folds) {
  MetricsRecord m;
  for (const auto field : {&MetricsRecord::accuracy, &MetricsRecord::sensitivity, &MetricsRecord::specificity, &MetricsRecord::ppv,
                           &MetricsRecord::npv, &MetricsRecord::tpr, &MetricsRecord::fpr, &MetricsRecord::auc})
    m.*field = mean_defined(folds, field);
  return m;
}

inline FoldResult evaluate_fold(const Classifier& model, const Dataset& test, std::vector<double>& scores) {
  FoldResult r;
  r.n_test = test.size();
  scores.assign(test.size(), 0.0);
  std::vector<int> predicted(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    scores[i] = model.predict_proba(test.features.row(i));
    if (!std::isfinite(scores[i])) throw TrainingError("model produced a non-finite score");
    predicted[i] = scores[i] >= kDecisionThreshold ? 1 : 0;
  }
  r.confusion = confusion_matrix(predicted, test.labels);
  r.metrics = metrics_from_confusion(r.confusion);
  const auto dist = class_distribution(test.labels);
  if (dist.positives > 0 && dist.negatives > 0) r.metrics.auc = auc(scores, test.labels);
  if (const auto* stacked = dynamic_cast<const StackedModel*>(&model)) {
    r.meta_training_accuracy = stacked->meta_training_accuracy;
    r.leakage_free = audit_no_leakage(stacked->meta_training);
  }
  return r;
}

}  // namespace detail

inline std::uint64_t fold_plan_seed(std::uint64_t master, const std::string& dataset) { return derive_seed(master, dataset, "folds"); }
inline std::uint64_t job_seed(std::uint64_t master, const std::string& dataset, const std::string& model, std::size_t fold) {
  return derive_seed(master, dataset, model, static_cast<std::uint64_t>(fold));
}

using ProgressFn = std::function<void(const std::string&)>;

inline Report run_experiment(const ExperimentConfig& config, const DatasetLoader& loader, const ProgressFn& progress = {}) {
  config.validate();
  Report report;
  report.seed = config.seed;
  report.k = config.k;
  report.config_sha256 = config.hash();
  const LearnerRegistry registry(config.learner_params);

  for (const auto& name : config.datasets) {
    LoadedDataset loaded;
    try {
      loaded = loader(name);
    } catch (const std::exception& e) {
      throw Error("dataset '" + name + "': " + e.what());
    }
    const auto& data = loaded.data;
    data.validate(true);
    const auto dist = class_distribution(data);
    report.datasets.push_back({name, data.size(), data.n_features(), dist.negatives, dist.positives, dist.majority_rate, loaded.sha256});

    FoldPlan plan;
    std::vector<Dataset> train_sets;
    std::vector<Dataset> test_sets;
    try {
      plan = stratified_kfold(data, config.k, fold_plan_seed(config.seed, name));
      for (const auto& fold : plan.folds) {
        const auto imputed = impute_missing(data, loaded.sentinels, fold.train);
        train_sets.push_back(imputed.subset(fold.train));
        test_sets.push_back(imputed.subset(fold.test));
      }
    } catch (const std::exception& e) {
      throw Error("dataset '" + name + "': " + e.what());
    }

    for (const auto& id : config.roster) {
      const auto learner = registry.make(id);
      ReportRow row;
      row.dataset = name;
      row.model = id;
      row.label = display_name(id);
      row.oof_scores.assign(data.size(), 0.0);
      row.actual = data.labels;
      for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        if (progress) progress(name + " / " + id + " / fold " + std::to_string(f + 1) + " of " + std::to_string(plan.folds.size()));
        try {
          const auto model = learner->fit(train_sets[f], job_seed(config.seed, name, id, f));
          std::vector<double> scores;
          row.folds.push_back(detail::evaluate_fold(*model, test_sets[f], scores));
          for (std::size_t i = 0; i < scores.size(); ++i) row.oof_scores[plan.folds[f].test[i]] = scores[i];
        } catch (const std::exception& e) {
          throw Error("dataset '" + name + "', model '" + id + "', fold " + std::to_string(f) + ": " + e.what());
        }
      }
      if (row.evaluated() != data.size())
        throw Error("dataset '" + name + "', model '" + id + "': folds evaluated " + std::to_string(row.evaluated()) + " of " +
                    std::to_string(data.size()) + " samples");
      row.mean = detail::mean_metrics(row.folds);
      if (!row.folds.empty() && row.folds.front().meta_training_accuracy) {
        double sum = 0.0;
        bool clean = true;
        for (const auto& f : row.folds) {
          sum += *f.meta_training_accuracy;
          clean = clean && *f.leakage_free;
        }
        row.meta_training_accuracy = sum / static_cast<double>(row.folds.size());
        row.leakage_free = clean;
      }
      if (config.strict && *row.mean.accuracy < dist.majority_rate - 0.03)
        throw Error("strict: dataset '" + name + "', model '" + id + "' accuracy " + std::to_string(*row.mean.accuracy) +
                    " is more than 3 points below the majority rate " + std::to_string(dist.majority_rate));
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace stackgen
