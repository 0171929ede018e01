#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stackgen/dataset.hpp"
#include "stackgen/error.hpp"
#include "stackgen/preprocess.hpp"

namespace stackgen {

inline constexpr double kDecisionThreshold = 0.5;

// A fitted binary classifier. predict() is 1 exactly when predict_proba() is
// at least 0.5, so ties go to the positive class.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual double predict_proba(std::span<const double> x) const = 0;

  int predict(std::span<const double> x) const { return predict_proba(x) >= kDecisionThreshold ? 1 : 0; }

  std::vector<double> predict_proba(const Matrix& x) const {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_proba(x.row(r));
    return out;
  }
};

using ClassifierPtr = std::unique_ptr<const Classifier>;

// Adapts any model value type with `double predict_proba(span) const`.
template <typename Model>
class ModelClassifier final : public Classifier {
 public:
  explicit ModelClassifier(Model model) : model_(std::move(model)) {}

  double predict_proba(std::span<const double> x) const override { return model_.predict_proba(x); }

  const Model& model() const noexcept { return model_; }

 private:
  Model model_;
};

template <typename Model>
ClassifierPtr wrap(Model model) {
  return std::make_unique<ModelClassifier<Model>>(std::move(model));
}

// A configured, unfitted learning algorithm. `weights`, when non-empty, holds
// one non-negative weight per training row; only learners reporting
// supports_weights() accept it. `seed` is the learner's private stream.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string name() const = 0;
  virtual bool supports_weights() const { return false; }
  virtual ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t seed) const = 0;

  ClassifierPtr fit(const Dataset& train, std::uint64_t seed) const { return fit(train, {}, seed); }

 protected:
  void reject_weights(std::span<const double> weights) const {
    if (!weights.empty()) throw ConfigError("learner '" + name() + "' does not support instance weights");
  }
};

using LearnerPtr = std::shared_ptr<const Learner>;

// Fits z-score parameters on the training rows and applies them at predict
// time, so scale-sensitive learners never see statistics from held-out rows.
class StandardizedClassifier final : public Classifier {
 public:
  StandardizedClassifier(ScalerParams scaler, ClassifierPtr inner) : scaler_(std::move(scaler)), inner_(std::move(inner)) {}

  double predict_proba(std::span<const double> x) const override {
    thread_local std::vector<double> scratch;
    scratch.resize(x.size());
    scaler_.transform_row(x, scratch);
    return inner_->predict_proba(scratch);
  }

  const Classifier& inner() const noexcept { return *inner_; }

 private:
  ScalerParams scaler_;
  ClassifierPtr inner_;
};

class StandardizedLearner final : public Learner {
 public:
  using Learner::fit;
  explicit StandardizedLearner(LearnerPtr inner) : inner_(std::move(inner)) {}

  std::string name() const override { return inner_->name(); }
  bool supports_weights() const override { return inner_->supports_weights(); }

  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t seed) const override {
    auto scaler = ScalerParams::fit(train.features);
    auto model = inner_->fit(scaler.transform(train), weights, seed);
    return std::make_unique<StandardizedClassifier>(std::move(scaler), std::move(model));
  }

 private:
  LearnerPtr inner_;
};

// Predicts the training-set frequency of class 1 for every input.
struct MajorityModel {
  double positive_rate = 0.0;
  double predict_proba(std::span<const double>) const { return positive_rate; }
};

// Always predicts the majority class: probability 1 or 0 from the training
// tally (ties go to class 0, matching class_distribution).
class MajorityLearner final : public Learner {
 public:
  using Learner::fit;
  std::string name() const override { return "majority"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t) const override {
    reject_weights(weights);
    const auto dist = class_distribution(train);
    return wrap(MajorityModel{dist.majority_label() == 1 ? 1.0 : 0.0});
  }
};

// Fixed-probability classifier; used by tests and as an ensemble stub.
class ConstantLearner final : public Learner {
 public:
  using Learner::fit;
  explicit ConstantLearner(double p) : p_(p) {}
  std::string name() const override { return "constant"; }
  bool supports_weights() const override { return true; }
  ClassifierPtr fit(const Dataset&, std::span<const double>, std::uint64_t) const override { return wrap(MajorityModel{p_}); }

 private:
  double p_;
};

inline std::vector<int> labels_of(const Classifier& model, const Matrix& x) {
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = model.predict(x.row(r));
  return out;
}

inline double accuracy_on(const Classifier& model, const Dataset& data) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.size(); ++r) correct += model.predict(data.features.row(r)) == data.labels[r] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

inline void require_both_classes(std::span<const int> labels, const char* who) {
  bool seen[2] = {false, false};
  for (const int y : labels) seen[y == 1] = true;
  if (!seen[0] || !seen[1]) throw TrainingError(std::string(who) + ": training set must contain both classes");
}

}  // namespace stackgen
