#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stackgen/dataset.hpp"
#include "stackgen/error.hpp"
#include "stackgen/rng.hpp"

namespace stackgen {

// ---------------------------------------------------------------------------
// Imputation

inline bool is_missing(double value, const std::optional<double>& sentinel) {
  return std::isnan(value) || (sentinel && value == *sentinel);
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty set");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Replaces missing cells (NaN, or equal to the column sentinel) with the
// median of that column's non-missing values over `train_indices` only.
inline Dataset impute_missing(const Dataset& data, std::span<const std::optional<double>> sentinels,
                              std::span<const std::size_t> train_indices) {
  if (train_indices.empty()) throw Error("impute_missing: empty training index set");
  if (sentinels.size() != data.n_features()) throw Error("impute_missing: sentinel list does not match feature count");
  Dataset out = data;
  std::vector<double> observed;
  for (std::size_t c = 0; c < data.n_features(); ++c) {
    bool any_missing = false;
    for (std::size_t r = 0; r < data.size() && !any_missing; ++r) any_missing = is_missing(data.features(r, c), sentinels[c]);
    if (!any_missing) continue;

    observed.clear();
    for (const auto r : train_indices) {
      const double v = data.features(r, c);
      if (!is_missing(v, sentinels[c])) observed.push_back(v);
    }
    if (observed.empty())
      throw Error("impute_missing: column '" + data.feature_names[c] + "' has no observed values in the training rows");
    const double fill = median(observed);
    for (std::size_t r = 0; r < data.size(); ++r)
      if (is_missing(data.features(r, c), sentinels[c])) out.features(r, c) = fill;
  }
  return out;
}

inline Dataset impute_missing(const Dataset& data, const DatasetSchema& schema, std::span<const std::size_t> train_indices) {
  const auto sentinels = schema.feature_sentinels();
  return impute_missing(data, sentinels, train_indices);
}

// ---------------------------------------------------------------------------
// Standardization

struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> stddev;  // population; 0 marks a constant column

  static ScalerParams fit(const Matrix& x) {
    if (x.rows() == 0) throw Error("standardize: empty training set");
    ScalerParams p;
    p.mean.assign(x.cols(), 0.0);
    p.stddev.assign(x.cols(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) sum += x(r, c);
      const double mu = sum / n;
      double ss = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) ss += (x(r, c) - mu) * (x(r, c) - mu);
      p.mean[c] = mu;
      p.stddev[c] = std::sqrt(ss / n);
    }
    return p;
  }

  double transform(std::size_t c, double v) const {
    const double centered = v - mean[c];
    return stddev[c] > 0.0 ? centered / stddev[c] : centered;
  }

  double inverse(std::size_t c, double z) const { return stddev[c] > 0.0 ? z * stddev[c] + mean[c] : z + mean[c]; }

  void transform_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < in.size(); ++c) out[c] = transform(c, in[c]);
  }

  Matrix transform(const Matrix& x) const {
    if (x.cols() != mean.size()) throw Error("standardize: feature count mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) transform_row(x.row(r), out.row(r));
    return out;
  }

  Dataset transform(const Dataset& d) const {
    Dataset out = d;
    out.features = transform(d.features);
    return out;
  }
};

struct Standardized {
  Dataset train;
  std::vector<Dataset> others;
  ScalerParams params;
};

inline Standardized standardize(const Dataset& train, std::span<const Dataset> others = {}) {
  Standardized out;
  out.params = ScalerParams::fit(train.features);
  out.train = out.params.transform(train);
  for (const auto& d : others) out.others.push_back(out.params.transform(d));
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation plans

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  friend bool operator==(const Fold&, const Fold&) = default;
};

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;

  // Throws unless the test sets partition {0..n-1} and every train set is the
  // complement of its test set.
  void validate(std::size_t n) const {
    if (folds.size() != k) throw Error("fold plan: fold count differs from k");
    std::vector<int> owner(n, -1);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      for (const auto i : folds[f].test) {
        if (i >= n) throw Error("fold plan: index out of range");
        if (owner[i] != -1) throw Error("fold plan: index " + std::to_string(i) + " appears in two test sets");
        owner[i] = static_cast<int>(f);
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (owner[i] == -1) throw Error("fold plan: index " + std::to_string(i) + " is in no test set");
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto& train = folds[f].train;
      if (train.size() + folds[f].test.size() != n) throw Error("fold plan: train set is not the test complement");
      for (const auto i : train)
        if (i >= n || owner[i] == static_cast<int>(f)) throw Error("fold plan: train set is not the test complement");
    }
  }
};

// Each class is shuffled with its own stream and dealt round-robin; the deal
// continues across classes so fold sizes differ by at most one overall.
inline FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == 1 ? 1 : 0].push_back(i);
  const auto minority = std::min(by_class[0].size(), by_class[1].size());
  if (k < 2 || k > minority)
    throw Error("stratified_kfold: k = " + std::to_string(k) + " must lie in [2, " + std::to_string(minority) +
                "], bounded above by the minority-class count");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(k);
  std::size_t slot = 0;
  for (std::uint64_t cls = 0; cls < 2; ++cls) {
    auto members = by_class[cls];
    Rng rng(derive_seed(seed, "stratified_kfold", cls));
    rng.shuffle(std::span<std::size_t>(members));
    for (const auto i : members) plan.folds[slot++ % k].test.push_back(i);
  }
  for (auto& fold : plan.folds) {
    std::sort(fold.test.begin(), fold.test.end());
    std::vector<char> in_test(labels.size(), 0);
    for (const auto i : fold.test) in_test[i] = 1;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (!in_test[i]) fold.train.push_back(i);
  }
  return plan;
}

inline FoldPlan stratified_kfold(const Dataset& data, std::size_t k, std::uint64_t seed) {
  return stratified_kfold(std::span<const int>(data.labels), k, seed);
}

// ---------------------------------------------------------------------------

struct ClassDistribution {
  std::size_t negatives = 0;
  std::size_t positives = 0;
  double majority_rate = 0.0;
  int majority_label() const { return positives > negatives ? 1 : 0; }
};

inline ClassDistribution class_distribution(std::span<const int> labels) {
  if (labels.empty()) throw Error("class_distribution: empty dataset");
  ClassDistribution d;
  for (const int y : labels) (y == 1 ? d.positives : d.negatives) += 1;
  d.majority_rate = static_cast<double>(std::max(d.negatives, d.positives)) / static_cast<double>(labels.size());
  return d;
}

inline ClassDistribution class_distribution(const Dataset& data) { return class_distribution(std::span<const int>(data.labels)); }

}  // namespace stackgen
