#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/dataset.hpp"

namespace stackgen {

// Gaussian naive Bayes: P(h|d) is proportional to P(h) * prod_j P(d_j|h).
struct GaussianNBModel {
  std::array<double, 2> prior{0.5, 0.5};
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> variance;

  double log_joint(int cls, std::span<const double> x) const {
    const auto& mu = mean[cls];
    const auto& var = variance[cls];
    double s = std::log(prior[cls]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - mu[j];
      s -= 0.5 * (std::log(2.0 * std::numbers::pi * var[j]) + d * d / var[j]);
    }
    return s;
  }

  // Normalized over the two classes in log space.
  std::array<double, 2> posterior(std::span<const double> x) const {
    const double l0 = log_joint(0, x);
    const double l1 = log_joint(1, x);
    const double m = std::max(l0, l1);
    const double e0 = std::exp(l0 - m);
    const double e1 = std::exp(l1 - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
  }

  double predict_proba(std::span<const double> x) const { return posterior(x)[1]; }
};

inline constexpr double kDefaultVarianceFloor = 1e-9;

// Maximum-likelihood Gaussians per class. Each variance is floored at
// `relative_floor` times the largest overall feature variance.
inline GaussianNBModel fit_gaussian_nb(const Dataset& train, double relative_floor = kDefaultVarianceFloor) {
  require_both_classes(train.labels, "fit_gaussian_nb");
  const std::size_t d = train.n_features();
  const auto& x = train.features;

  double max_var = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) sum += x(r, c);
    const double mu = sum / static_cast<double>(x.rows());
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) ss += (x(r, c) - mu) * (x(r, c) - mu);
    max_var = std::max(max_var, ss / static_cast<double>(x.rows()));
  }
  // All-constant features leave nothing to scale against.
  const double floor = max_var > 0.0 ? relative_floor * max_var : relative_floor;

  GaussianNBModel model;
  std::array<double, 2> count{0.0, 0.0};
  for (int cls = 0; cls < 2; ++cls) {
    model.mean[cls].assign(d, 0.0);
    model.variance[cls].assign(d, 0.0);
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int cls = train.labels[r];
    count[cls] += 1.0;
    for (std::size_t c = 0; c < d; ++c) model.mean[cls][c] += x(r, c);
  }
  for (int cls = 0; cls < 2; ++cls)
    for (auto& m : model.mean[cls]) m /= count[cls];
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int cls = train.labels[r];
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = x(r, c) - model.mean[cls][c];
      model.variance[cls][c] += dev * dev;
    }
  }
  for (int cls = 0; cls < 2; ++cls)
    for (auto& v : model.variance[cls]) v = std::max(v / count[cls], floor);

  const double n = count[0] + count[1];
  model.prior = {count[0] / n, count[1] / n};
  return model;
}

class GaussianNBLearner final : public Learner {
 public:
  using Learner::fit;
  explicit GaussianNBLearner(double relative_floor = kDefaultVarianceFloor) : floor_(relative_floor) {}
  std::string name() const override { return "naive_bayes"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t) const override {
    reject_weights(weights);
    return wrap(fit_gaussian_nb(train, floor_));
  }

 private:
  double floor_;
};

}  // namespace stackgen
