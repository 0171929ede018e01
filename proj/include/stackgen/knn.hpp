#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/dataset.hpp"

namespace stackgen {

enum class DistanceMetric { euclidean, hamming };

inline DistanceMetric parse_metric(const std::string& s) {
  if (s == "euclidean") return DistanceMetric::euclidean;
  if (s == "hamming") return DistanceMetric::hamming;
  throw ConfigError("unknown k-NN metric '" + s + "'");
}

// Squared Euclidean distance ranks neighbours identically to Euclidean.
inline double distance(DistanceMetric metric, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  if (metric == DistanceMetric::euclidean) {
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] != b[i] ? 1.0 : 0.0;
  }
  return s;
}

struct KnnModel {
  Matrix features;
  std::vector<int> labels;
  std::size_t k = 5;
  DistanceMetric metric = DistanceMetric::euclidean;

  // Fraction of class-1 points among the k nearest. Equal distances are
  // ordered by training-row index.
  double predict_proba(std::span<const double> x) const {
    thread_local std::vector<std::pair<double, std::size_t>> scratch;
    scratch.resize(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) scratch[r] = {distance(metric, x, features.row(r)), r};
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < k; ++i) positives += labels[scratch[i].second] == 1 ? 1 : 0;
    return static_cast<double>(positives) / static_cast<double>(k);
  }
};

inline KnnModel fit_knn(const Dataset& train, std::size_t k = 5, DistanceMetric metric = DistanceMetric::euclidean) {
  if (k < 1) throw ConfigError("fit_knn: k must be at least 1");
  if (k > train.size())
    throw ConfigError("fit_knn: k = " + std::to_string(k) + " exceeds the training size " + std::to_string(train.size()));
  return KnnModel{train.features, train.labels, k, metric};
}

class KnnLearner final : public Learner {
 public:
  using Learner::fit;
  KnnLearner(std::size_t k = 5, DistanceMetric metric = DistanceMetric::euclidean) : k_(k), metric_(metric) {}
  std::string name() const override { return "knn"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t) const override {
    reject_weights(weights);
    return wrap(fit_knn(train, k_, metric_));
  }

 private:
  std::size_t k_;
  DistanceMetric metric_;
};

}  // namespace stackgen
