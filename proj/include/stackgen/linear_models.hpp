#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/error.hpp"
#include "stackgen/params.hpp"

namespace stackgen {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Gaussian elimination with partial pivoting. Returns nullopt when a pivot
// falls below `rel_tol` times the largest diagonal magnitude.
inline std::optional<std::vector<double>> solve_linear_system(Matrix a, std::vector<double> b, double rel_tol = 1e-12) {
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
  if (scale == 0.0) return std::nullopt;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) <= rel_tol * scale) return std::nullopt;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
    x[i] = s / a(i, i);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Ordinary least squares: y = a + b.x + u

struct LinearModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double residual_variance = 0.0;
  bool ridge_fallback = false;

  double response(std::span<const double> x) const { return intercept + dot(coefficients, x); }

  // Used as a classifier, the clamped linear response is the probability.
  double predict_proba(std::span<const double> x) const { return std::clamp(response(x), 0.0, 1.0); }
};

inline constexpr double kRidgeFallback = 1e-8;

inline LinearModel fit_linear_regression(const Matrix& x, std::span<const double> y) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (y.size() != n) throw Error("fit_linear_regression: target length differs from row count");
  if (n < d + 1) throw TrainingError("fit_linear_regression: need at least n_features + 1 samples");

  // Normal equations on [1 | X].
  const std::size_t p = d + 1;
  Matrix gram(p, p);
  std::vector<double> rhs(p, 0.0);
  std::vector<double> design(p);
  for (std::size_t r = 0; r < n; ++r) {
    design[0] = 1.0;
    for (std::size_t c = 0; c < d; ++c) design[c + 1] = x(r, c);
    for (std::size_t i = 0; i < p; ++i) {
      rhs[i] += design[i] * y[r];
      for (std::size_t j = i; j < p; ++j) gram(i, j) += design[i] * design[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);

  LinearModel model;
  auto solution = solve_linear_system(gram, rhs);
  if (!solution) {
    for (std::size_t i = 1; i < p; ++i) gram(i, i) += kRidgeFallback;
    solution = solve_linear_system(gram, rhs, 0.0);
    model.ridge_fallback = true;
  }
  if (!solution) throw TrainingError("fit_linear_regression: normal equations are singular even with ridge");

  model.intercept = (*solution)[0];
  model.coefficients.assign(solution->begin() + 1, solution->end());
  double ssr = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double e = y[r] - model.response(x.row(r));
    ssr += e * e;
  }
  model.residual_variance = n > p ? ssr / static_cast<double>(n - p) : 0.0;
  return model;
}

inline LinearModel fit_linear_regression(const Dataset& train) {
  std::vector<double> y(train.labels.begin(), train.labels.end());
  return fit_linear_regression(train.features, y);
}

class LinearRegressionLearner final : public Learner {
 public:
  using Learner::fit;
  std::string name() const override { return "linear_regression"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t) const override {
    reject_weights(weights);
    return wrap(fit_linear_regression(train));
  }
};

// ---------------------------------------------------------------------------
// Logistic regression: logit(p) = b0 + b1 x1 + ... + bn xn

struct LogisticConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 1000;
  double l2 = 1e-4;

  static LogisticConfig from(const Params& p) {
    LogisticConfig c;
    c.learning_rate = p.get_double("lr", c.learning_rate);
    c.epochs = static_cast<std::size_t>(p.get_int("epochs", static_cast<long long>(c.epochs)));
    c.l2 = p.get_double("l2", c.l2);
    if (c.learning_rate <= 0.0) throw ConfigError("logistic: lr must be positive");
    if (c.l2 < 0.0) throw ConfigError("logistic: l2 must be non-negative");
    return c;
  }
};

struct LogisticModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<double> loss_trace;

  double decision(std::span<const double> x) const { return intercept + dot(coefficients, x); }
  double predict_proba(std::span<const double> x) const { return sigmoid(decision(x)); }
};

// Mean negative log-likelihood plus (l2/2)|beta|^2. The intercept is not
// penalized. Parameters are packed as [intercept, beta...].
class LogisticObjective {
 public:
  LogisticObjective(const Matrix& x, std::span<const int> y, double l2) : x_(x), y_(y), l2_(l2) {}

  std::size_t dimension() const { return x_.cols() + 1; }

  double value(std::span<const double> params) const {
    double loss = 0.0;
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      const double z = params[0] + dot(params.subspan(1), x_.row(r));
      loss += softplus(z) - y_[r] * z;
    }
    loss /= static_cast<double>(x_.rows());
    double penalty = 0.0;
    for (std::size_t i = 1; i < params.size(); ++i) penalty += params[i] * params[i];
    return loss + 0.5 * l2_ * penalty;
  }

  std::vector<double> gradient(std::span<const double> params) const {
    std::vector<double> g(params.size(), 0.0);
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      const auto row = x_.row(r);
      const double residual = sigmoid(params[0] + dot(params.subspan(1), row)) - y_[r];
      g[0] += residual;
      for (std::size_t c = 0; c < row.size(); ++c) g[c + 1] += residual * row[c];
    }
    const double inv_n = 1.0 / static_cast<double>(x_.rows());
    for (auto& v : g) v *= inv_n;
    for (std::size_t i = 1; i < params.size(); ++i) g[i] += l2_ * params[i];
    return g;
  }

 private:
  const Matrix& x_;
  std::span<const int> y_;
  double l2_;
};

// Full-batch gradient descent from zero. loss_trace[e] is the objective at the
// start of epoch e; one final entry records the returned parameters.
inline LogisticModel fit_logistic_regression(const Dataset& train, const LogisticConfig& config = {}) {
  require_both_classes(train.labels, "fit_logistic_regression");
  const LogisticObjective objective(train.features, train.labels, config.l2);
  std::vector<double> params(objective.dimension(), 0.0);
  LogisticModel model;
  model.loss_trace.reserve(config.epochs + 1);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    model.loss_trace.push_back(objective.value(params));
    const auto g = objective.gradient(params);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.learning_rate * g[i];
  }
  model.loss_trace.push_back(objective.value(params));
  model.intercept = params[0];
  model.coefficients.assign(params.begin() + 1, params.end());
  return model;
}

class LogisticLearner final : public Learner {
 public:
  using Learner::fit;
  explicit LogisticLearner(LogisticConfig config = {}) : config_(config) {}
  std::string name() const override { return "logistic"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t) const override {
    reject_weights(weights);
    return wrap(fit_logistic_regression(train, config_));
  }

 private:
  LogisticConfig config_;
};

}  // namespace stackgen
