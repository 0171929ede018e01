#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/error.hpp"
#include "stackgen/preprocess.hpp"
#include "stackgen/rng.hpp"

namespace stackgen {

// out_of_fold: every meta-training row is predicted by base models that never
// saw it. naive: base models fitted on all rows predict those same rows,
// which leaks labels into the meta-learner; kept for comparison.
enum class StackingMode { out_of_fold, naive };

// Level-1 training data plus the audit trail of which base model produced
// each cell.
struct MetaFeatures {
  Matrix features;  // one column per base learner
  std::vector<int> labels;
  std::vector<std::string> learner_names;
  std::vector<std::size_t> producer;                          // rows x learners, row-major model ids
  std::vector<std::vector<std::size_t>> model_train_indices;  // indexed by model id, sorted

  std::size_t producer_of(std::size_t row, std::size_t learner) const { return producer[row * features.cols() + learner]; }
};

namespace detail {

inline ClassifierPtr fit_base(const Learner& learner, const Dataset& train, std::uint64_t seed, const std::string& where) {
  try {
    return learner.fit(train, seed);
  } catch (const std::exception& e) {
    throw TrainingError("stacking: base learner '" + learner.name() + "' failed on " + where + ": " + e.what());
  }
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace detail

inline std::uint64_t fold_model_seed(std::uint64_t seed, std::size_t learner, std::size_t fold) {
  return derive_seed(seed, "base", static_cast<std::uint64_t>(learner), static_cast<std::uint64_t>(fold));
}
inline std::uint64_t final_model_seed(std::uint64_t seed, std::size_t learner) {
  return derive_seed(seed, "final", static_cast<std::uint64_t>(learner));
}
inline std::uint64_t meta_model_seed(std::uint64_t seed) { return derive_seed(seed, "meta"); }

// Out-of-fold predictions: for fold f, learner t is fitted on the fold's train
// rows and predicts its test rows. Model id of (fold f, learner t) is f*T + t.
inline MetaFeatures build_meta_features(std::span<const LearnerPtr> bases, const Dataset& train, const FoldPlan& plan,
                                        std::uint64_t seed) {
  if (bases.empty()) throw ConfigError("stacking: at least one base learner is required");
  plan.validate(train.size());
  const std::size_t t_count = bases.size();
  MetaFeatures meta;
  meta.features = Matrix(train.size(), t_count);
  meta.labels = train.labels;
  meta.producer.assign(train.size() * t_count, 0);
  for (const auto& b : bases) meta.learner_names.push_back(b->name());
  meta.model_train_indices.resize(plan.folds.size() * t_count);

  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    const auto fold_train = train.subset(fold.train);
    for (std::size_t t = 0; t < t_count; ++t) {
      const auto model =
          detail::fit_base(*bases[t], fold_train, fold_model_seed(seed, t, f), "fold " + std::to_string(f));
      const std::size_t id = f * t_count + t;
      auto& trained_on = meta.model_train_indices[id];
      trained_on = fold.train;
      std::sort(trained_on.begin(), trained_on.end());
      for (const auto i : fold.test) {
        meta.features(i, t) = model->predict_proba(train.features.row(i));
        meta.producer[i * t_count + t] = id;
      }
    }
  }
  return meta;
}

// True when no meta-feature cell was produced by a model trained on its row.
inline bool audit_no_leakage(const MetaFeatures& meta) {
  for (std::size_t i = 0; i < meta.features.rows(); ++i) {
    for (std::size_t t = 0; t < meta.features.cols(); ++t) {
      const auto& trained_on = meta.model_train_indices.at(meta.producer_of(i, t));
      if (std::binary_search(trained_on.begin(), trained_on.end(), i)) return false;
    }
  }
  return true;
}

class StackedModel final : public Classifier {
 public:
  std::vector<std::string> base_names;
  std::vector<ClassifierPtr> final_models;
  ClassifierPtr meta;
  MetaFeatures meta_training;
  StackingMode mode = StackingMode::out_of_fold;
  double meta_training_accuracy = 0.0;

  std::vector<double> meta_input(std::span<const double> x) const {
    std::vector<double> z(final_models.size());
    for (std::size_t t = 0; t < final_models.size(); ++t) z[t] = final_models[t]->predict_proba(x);
    return z;
  }

  double predict_proba(std::span<const double> x) const override { return meta->predict_proba(meta_input(x)); }
};

// Fits the meta-learner on level-1 data and refits every base learner on all
// rows for inference. In naive mode the refitted models also produce the
// level-1 data (model id T*k + t, trained on every row).
inline std::unique_ptr<StackedModel> fit_stacking(std::span<const LearnerPtr> bases, const Learner& meta_learner, const Dataset& train,
                                                  const FoldPlan& plan, std::uint64_t seed,
                                                  StackingMode mode = StackingMode::out_of_fold) {
  if (bases.empty()) throw ConfigError("stacking: at least one base learner is required");
  auto model = std::make_unique<StackedModel>();
  model->mode = mode;
  for (const auto& b : bases) model->base_names.push_back(b->name());
  for (std::size_t t = 0; t < bases.size(); ++t)
    model->final_models.push_back(detail::fit_base(*bases[t], train, final_model_seed(seed, t), "the full training set"));

  if (mode == StackingMode::out_of_fold) {
    model->meta_training = build_meta_features(bases, train, plan, seed);
  } else {
    auto& meta = model->meta_training;
    const std::size_t t_count = bases.size();
    meta.features = Matrix(train.size(), t_count);
    meta.labels = train.labels;
    meta.learner_names = model->base_names;
    meta.producer.assign(train.size() * t_count, 0);
    meta.model_train_indices.resize(plan.folds.size() * t_count + t_count);
    const auto everything = detail::all_indices(train.size());
    for (std::size_t t = 0; t < t_count; ++t) {
      const std::size_t id = plan.folds.size() * t_count + t;
      meta.model_train_indices[id] = everything;
      for (std::size_t i = 0; i < train.size(); ++i) {
        meta.features(i, t) = model->final_models[t]->predict_proba(train.features.row(i));
        meta.producer[i * t_count + t] = id;
      }
    }
  }

  Dataset level1;
  level1.features = model->meta_training.features;
  level1.labels = model->meta_training.labels;
  level1.feature_names = model->base_names;
  level1.positive_label_name = train.positive_label_name;
  try {
    model->meta = meta_learner.fit(level1, meta_model_seed(seed));
  } catch (const std::exception& e) {
    throw TrainingError("stacking: meta learner '" + meta_learner.name() + "' failed: " + e.what());
  }
  model->meta_training_accuracy = accuracy_on(*model->meta, level1);
  return model;
}

// Meta stub: fraction of inputs at or above 0.5. Stacked over base
// probabilities this is the plain majority vote, ties going to class 1.
struct VoteModel {
  double predict_proba(std::span<const double> z) const {
    std::size_t yes = 0;
    for (const double p : z) yes += p >= kDecisionThreshold ? 1 : 0;
    return static_cast<double>(yes) / static_cast<double>(z.size());
  }
};

class VoteLearner final : public Learner {
 public:
  using Learner::fit;
  std::string name() const override { return "vote"; }
  ClassifierPtr fit(const Dataset&, std::span<const double> weights, std::uint64_t) const override {
    reject_weights(weights);
    return wrap(VoteModel{});
  }
};

// Builds its own stratified inner plan from the training rows it is given.
class StackingLearner final : public Learner {
 public:
  using Learner::fit;
  StackingLearner(std::string name, std::vector<LearnerPtr> bases, LearnerPtr meta, std::size_t inner_folds,
                  StackingMode mode = StackingMode::out_of_fold)
      : name_(std::move(name)), bases_(std::move(bases)), meta_(std::move(meta)), inner_folds_(inner_folds), mode_(mode) {
    if (bases_.empty()) throw ConfigError("stacking: at least one base learner is required");
    if (inner_folds_ < 2) throw ConfigError("stacking: internal_folds must be at least 2");
  }

  std::string name() const override { return name_; }

  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t seed) const override {
    reject_weights(weights);
    const auto plan = stratified_kfold(train, inner_folds_, derive_seed(seed, "inner_plan"));
    return fit_stacking(bases_, *meta_, train, plan, seed, mode_);
  }

  const std::vector<LearnerPtr>& bases() const noexcept { return bases_; }
  StackingMode mode() const noexcept { return mode_; }

 private:
  std::string name_;
  std::vector<LearnerPtr> bases_;
  LearnerPtr meta_;
  std::size_t inner_folds_;
  StackingMode mode_;
};

}  // namespace stackgen
