#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/linear_models.hpp"
#include "stackgen/params.hpp"

namespace stackgen {

struct SvmConfig {
  double c = 1.0;
  std::size_t epochs = 1000;
  double learning_rate = 0.1;
  double decay_offset = 100.0;  // step at epoch t is lr / (1 + t / decay_offset)

  static SvmConfig from(const Params& p) {
    SvmConfig s;
    s.c = p.get_double("C", s.c);
    s.epochs = static_cast<std::size_t>(p.get_int("epochs", static_cast<long long>(s.epochs)));
    s.learning_rate = p.get_double("lr", s.learning_rate);
    s.decay_offset = p.get_double("decay_offset", s.decay_offset);
    if (s.c <= 0.0) throw ConfigError("svm: C must be positive");
    if (s.learning_rate <= 0.0 || s.decay_offset <= 0.0) throw ConfigError("svm: lr and decay_offset must be positive");
    return s;
  }
};

// Probabilities are the logistic squashing of the signed margin. They order
// samples correctly but are not calibrated.
struct LinearSvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c = 1.0;
  double objective = 0.0;

  double margin(std::span<const double> x) const { return dot(weights, x) + bias; }
  double predict_proba(std::span<const double> x) const { return sigmoid(margin(x)); }
};

// (1/2)|w|^2 + C * sum_i max(0, 1 - y_i (w.x_i + b)) with y_i in {-1,+1}.
// Parameters are packed as [w..., b].
class SvmObjective {
 public:
  SvmObjective(const Matrix& x, std::span<const int> labels, double c) : x_(x), c_(c) {
    signs_.reserve(labels.size());
    for (const int y : labels) signs_.push_back(y == 1 ? 1.0 : -1.0);
  }

  std::size_t dimension() const { return x_.cols() + 1; }

  double hinge_sum(std::span<const double> params) const {
    const auto w = params.first(x_.cols());
    const double b = params.back();
    double s = 0.0;
    for (std::size_t r = 0; r < x_.rows(); ++r) s += std::max(0.0, 1.0 - signs_[r] * (dot(w, x_.row(r)) + b));
    return s;
  }

  double value(std::span<const double> params) const {
    const auto w = params.first(x_.cols());
    return 0.5 * dot(w, w) + c_ * hinge_sum(params);
  }

  // A subgradient; samples with margin exactly 1 contribute nothing.
  std::vector<double> subgradient(std::span<const double> params) const {
    const std::size_t d = x_.cols();
    const auto w = params.first(d);
    const double b = params.back();
    std::vector<double> g(params.size(), 0.0);
    for (std::size_t i = 0; i < d; ++i) g[i] = w[i];
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      const auto row = x_.row(r);
      if (signs_[r] * (dot(w, row) + b) < 1.0) {
        for (std::size_t i = 0; i < d; ++i) g[i] -= c_ * signs_[r] * row[i];
        g[d] -= c_ * signs_[r];
      }
    }
    return g;
  }

  double c() const { return c_; }

 private:
  const Matrix& x_;
  std::vector<double> signs_;
  double c_;
};

// Deterministic full-batch subgradient descent from zero. Steps follow the
// subgradient scaled by 1/(C n), so the step size is independent of the
// training-set size. Subgradient steps are not monotone; the iterate with the
// lowest objective is returned.
inline LinearSvmModel fit_linear_svm(const Dataset& train, const SvmConfig& config = {}) {
  require_both_classes(train.labels, "fit_linear_svm");
  if (config.c <= 0.0) throw ConfigError("fit_linear_svm: C must be positive");
  const SvmObjective objective(train.features, train.labels, config.c);
  const double scale = 1.0 / (config.c * static_cast<double>(train.size()));

  std::vector<double> params(objective.dimension(), 0.0);
  std::vector<double> best = params;
  double best_value = objective.value(params);
  for (std::size_t t = 0; t < config.epochs; ++t) {
    const double step = config.learning_rate / (1.0 + static_cast<double>(t) / config.decay_offset);
    const auto g = objective.subgradient(params);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= step * scale * g[i];
    const double v = objective.value(params);
    if (v < best_value) {
      best_value = v;
      best = params;
    }
  }
  LinearSvmModel model;
  model.weights.assign(best.begin(), best.end() - 1);
  model.bias = best.back();
  model.c = config.c;
  model.objective = best_value;
  return model;
}

class LinearSvmLearner final : public Learner {
 public:
  using Learner::fit;
  explicit LinearSvmLearner(SvmConfig config = {}) : config_(config) {}
  std::string name() const override { return "svm"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t) const override {
    reject_weights(weights);
    return wrap(fit_linear_svm(train, config_));
  }

 private:
  SvmConfig config_;
};

}  // namespace stackgen
