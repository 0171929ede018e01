#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/error.hpp"
#include "stackgen/linear_models.hpp"
#include "stackgen/rng.hpp"
#include "stackgen/tree.hpp"

namespace stackgen {

// ---------------------------------------------------------------------------
// Bagging: mean of B models fitted on bootstrap resamples. At threshold 0.5
// the hard prediction is the majority vote of the averaged probabilities.

class BaggedModel final : public Classifier {
 public:
  std::vector<ClassifierPtr> models;
  std::vector<std::uint64_t> seeds;

  double predict_proba(std::span<const double> x) const override {
    double s = 0.0;
    for (const auto& m : models) s += m->predict_proba(x);
    return s / static_cast<double>(models.size());
  }
};

// Member b draws its resample from derive_seed(seed, b, "bootstrap") and
// fits with derive_seed(seed, b).
inline std::unique_ptr<BaggedModel> fit_bagging(const Learner& base, std::size_t n_models, const Dataset& train,
                                                std::uint64_t seed, bool bootstrap = true) {
  if (n_models < 1) throw ConfigError("fit_bagging: B must be at least 1");
  auto bag = std::make_unique<BaggedModel>();
  for (std::size_t b = 0; b < n_models; ++b) {
    const auto member_seed = derive_seed(seed, static_cast<std::uint64_t>(b));
    bag->seeds.push_back(member_seed);
    if (bootstrap) {
      const auto rows = bootstrap_indices(train.size(), derive_seed(seed, static_cast<std::uint64_t>(b), "bootstrap"));
      bag->models.push_back(base.fit(train.subset(rows), member_seed));
    } else {
      bag->models.push_back(base.fit(train, member_seed));
    }
  }
  return bag;
}

class BaggingLearner final : public Learner {
 public:
  using Learner::fit;
  BaggingLearner(LearnerPtr base, std::size_t n_models) : base_(std::move(base)), n_models_(n_models) {
    if (n_models_ < 1) throw ConfigError("bagging: B must be at least 1");
  }
  std::string name() const override { return "bagging"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t seed) const override {
    reject_weights(weights);
    return fit_bagging(*base_, n_models_, train, seed);
  }

 private:
  LearnerPtr base_;
  std::size_t n_models_;
};

// ---------------------------------------------------------------------------
// Discrete AdaBoost: F_T(x) = sum_t alpha_t f_t(x), f_t in {-1, +1}.

inline constexpr double kDefaultErrorFloor = 1e-10;

// alpha = (1/2) ln((1 - eps) / eps), with eps clamped up to `error_floor` so
// a perfect weak learner gets a large finite weight.
inline double adaboost_stage_weight(double weighted_error, double error_floor = kDefaultErrorFloor) {
  const double eps = std::max(weighted_error, error_floor);
  return 0.5 * std::log((1.0 - eps) / eps);
}

struct AdaBoostStage {
  std::shared_ptr<const Classifier> model;
  double alpha = 0.0;
  double weighted_error = 0.0;
};

class AdaBoostModel final : public Classifier {
 public:
  std::vector<AdaBoostStage> stages;
  // Instance weights entering each round (round t trains on weight_history[t]).
  std::vector<std::vector<double>> weight_history;

  double score(std::span<const double> x) const {
    double f = 0.0;
    for (const auto& s : stages) f += s.alpha * (s.model->predict(x) == 1 ? 1.0 : -1.0);
    return f;
  }

  // Logistic squashing of F_T. An ensemble with no stages scores 0.
  double predict_proba(std::span<const double> x) const override { return sigmoid(score(x)); }
};

// Instance weights start uniform. Each round fits the weak learner on the
// current weights and measures eps_t. Rounds stop before adding a stage when
// eps_t >= 0.5, and stop after adding one when eps_t <= error_floor.
// Misclassified weights are multiplied by exp(alpha_t), correctly classified
// ones are left as they are, and the result is renormalized.
inline std::unique_ptr<AdaBoostModel> fit_adaboost(const Learner& weak, std::size_t rounds, const Dataset& train, std::uint64_t seed,
                                                   double error_floor = kDefaultErrorFloor) {
  if (rounds < 1) throw ConfigError("fit_adaboost: T must be at least 1");
  if (!weak.supports_weights()) throw ConfigError("fit_adaboost: weak learner '" + weak.name() + "' does not support instance weights");
  const std::size_t n = train.size();
  auto model = std::make_unique<AdaBoostModel>();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<int> predicted(n);
  for (std::size_t t = 0; t < rounds; ++t) {
    model->weight_history.push_back(w);
    std::shared_ptr<const Classifier> h = weak.fit(train, w, derive_seed(seed, static_cast<std::uint64_t>(t)));
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      predicted[i] = h->predict(train.features.row(i));
      if (predicted[i] != train.labels[i]) eps += w[i];
    }
    if (eps >= 0.5) break;
    const double alpha = adaboost_stage_weight(eps, error_floor);
    model->stages.push_back({h, alpha, eps});
    if (eps <= error_floor) break;

    const double boost = std::exp(alpha);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (predicted[i] != train.labels[i]) w[i] *= boost;
      total += w[i];
    }
    for (auto& v : w) v /= total;
  }
  return model;
}

class AdaBoostLearner final : public Learner {
 public:
  using Learner::fit;
  AdaBoostLearner(LearnerPtr weak, std::size_t rounds, double error_floor = kDefaultErrorFloor)
      : weak_(std::move(weak)), rounds_(rounds), error_floor_(error_floor) {
    if (rounds_ < 1) throw ConfigError("boosting: T must be at least 1");
    if (!weak_->supports_weights()) throw ConfigError("boosting: weak learner '" + weak_->name() + "' does not support instance weights");
  }
  std::string name() const override { return "boosting"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t seed) const override {
    reject_weights(weights);
    return fit_adaboost(*weak_, rounds_, train, seed, error_floor_);
  }

 private:
  LearnerPtr weak_;
  std::size_t rounds_;
  double error_floor_;
};

}  // namespace stackgen
