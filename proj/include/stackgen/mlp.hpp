#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/error.hpp"
#include "stackgen/linear_models.hpp"
#include "stackgen/params.hpp"
#include "stackgen/rng.hpp"

namespace stackgen {

enum class Activation { relu, identity, tanh };

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity" || s == "linear") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::identity: return z;
    case Activation::tanh: return std::tanh(z);
  }
  return z;
}

// Derivative expressed through the pre-activation z and output h.
inline double activate_derivative(Activation a, double z, double h) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::identity: return 1.0;
    case Activation::tanh: return 1.0 - h * h;
  }
  return 1.0;
}

struct MlpArchitecture {
  std::size_t input_width = 1;
  std::vector<std::size_t> hidden_widths;
  Activation hidden_activation = Activation::relu;

  void validate() const {
    if (input_width < 1) throw ConfigError("mlp: input width must be at least 1");
    for (const auto w : hidden_widths)
      if (w < 1) throw ConfigError("mlp: hidden widths must be at least 1");
  }

  // Widths of every layer from input to the single sigmoid output.
  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{input_width};
    w.insert(w.end(), hidden_widths.begin(), hidden_widths.end());
    w.push_back(1);
    return w;
  }
};

struct MlpConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 500;
  double l2 = 1e-4;

  static MlpConfig from(const Params& p, MlpConfig defaults);
};

inline MlpConfig MlpConfig::from(const Params& p, MlpConfig c) {
  c.learning_rate = p.get_double("lr", c.learning_rate);
  c.momentum = p.get_double("momentum", c.momentum);
  c.batch_size = static_cast<std::size_t>(p.get_int("batch", static_cast<long long>(c.batch_size)));
  c.epochs = static_cast<std::size_t>(p.get_int("epochs", static_cast<long long>(c.epochs)));
  c.l2 = p.get_double("l2", c.l2);
  if (c.learning_rate <= 0.0) throw ConfigError("mlp: lr must be positive");
  if (c.momentum < 0.0 || c.momentum >= 1.0) throw ConfigError("mlp: momentum must lie in [0, 1)");
  if (c.batch_size < 1) throw ConfigError("mlp: batch must be at least 1");
  if (c.l2 < 0.0) throw ConfigError("mlp: l2 must be non-negative");
  return c;
}

// weights is (out x in); layer l maps width[l] to width[l + 1].
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MlpModel {
  MlpArchitecture arch;
  std::vector<DenseLayer> layers;
  MlpConfig config;
  std::uint64_t init_seed = 0;
  std::vector<double> loss_trace;

  // Output-unit pre-activation.
  double logit(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const { return sigmoid(logit(x)); }
};

inline double MlpModel::logit(std::span<const double> x) const {
  if (x.size() != arch.input_width)
    throw Error("mlp: input has width " + std::to_string(x.size()) + ", network expects " + std::to_string(arch.input_width));
  thread_local std::vector<double> current, next;
  current.assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const bool output = l + 1 == layers.size();
    next.resize(layer.bias.size());
    for (std::size_t o = 0; o < next.size(); ++o) {
      const double z = layer.bias[o] + dot(layer.weights.row(o), current);
      next[o] = output ? z : activate(arch.hidden_activation, z);
    }
    std::swap(current, next);
  }
  return current[0];
}

inline double forward(const MlpModel& model, std::span<const double> x) { return model.predict_proba(x); }

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
inline MlpModel init_mlp(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  MlpModel model;
  model.arch = arch;
  model.init_seed = seed;
  const auto widths = arch.widths();
  Rng rng(derive_seed(seed, "mlp_init"));
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer{Matrix(widths[l + 1], widths[l]), std::vector<double>(widths[l + 1], 0.0)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    for (auto& w : layer.weights.data()) w = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

struct MlpGradients {
  std::vector<DenseLayer> layers;

  double squared_norm() const {
    double s = 0.0;
    for (const auto& l : layers) {
      for (const double w : l.weights.data()) s += w * w;
      for (const double b : l.bias) s += b * b;
    }
    return s;
  }
};

struct BackwardResult {
  double loss = 0.0;
  MlpGradients gradients;
};

// Mean binary cross-entropy over `rows` plus (l2/2) times the squared weight
// norm (biases unpenalized), and its gradient by reverse-mode accumulation.
inline BackwardResult backward(const MlpModel& model, const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                               double l2) {
  if (rows.empty()) throw Error("mlp backward: empty batch");
  const auto& layers = model.layers;
  const std::size_t n_layers = layers.size();
  BackwardResult result;
  for (const auto& l : layers)
    result.gradients.layers.push_back(DenseLayer{Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size(), 0.0)});

  std::vector<std::vector<double>> pre(n_layers), post(n_layers + 1);
  std::vector<double> delta, prev_delta;
  for (const auto r : rows) {
    post[0].assign(x.row(r).begin(), x.row(r).end());
    for (std::size_t l = 0; l < n_layers; ++l) {
      const auto& layer = layers[l];
      const bool output = l + 1 == n_layers;
      pre[l].resize(layer.bias.size());
      post[l + 1].resize(layer.bias.size());
      for (std::size_t o = 0; o < layer.bias.size(); ++o) {
        const double z = layer.bias[o] + dot(layer.weights.row(o), post[l]);
        pre[l][o] = z;
        post[l + 1][o] = output ? z : activate(model.arch.hidden_activation, z);
      }
    }
    const double z = pre[n_layers - 1][0];
    result.loss += softplus(z) - y[r] * z;

    delta.assign(1, sigmoid(z) - y[r]);
    for (std::size_t l = n_layers; l-- > 0;) {
      auto& grad = result.gradients.layers[l];
      const auto& input = post[l];
      for (std::size_t o = 0; o < delta.size(); ++o) {
        grad.bias[o] += delta[o];
        auto g_row = grad.weights.row(o);
        for (std::size_t i = 0; i < input.size(); ++i) g_row[i] += delta[o] * input[i];
      }
      if (l == 0) break;
      prev_delta.assign(input.size(), 0.0);
      for (std::size_t o = 0; o < delta.size(); ++o) {
        const auto w_row = layers[l].weights.row(o);
        for (std::size_t i = 0; i < input.size(); ++i) prev_delta[i] += delta[o] * w_row[i];
      }
      for (std::size_t i = 0; i < input.size(); ++i)
        prev_delta[i] *= activate_derivative(model.arch.hidden_activation, pre[l - 1][i], input[i]);
      std::swap(delta, prev_delta);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(rows.size());
  result.loss *= inv_n;
  double penalty = 0.0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    auto& grad = result.gradients.layers[l];
    const auto w = layers[l].weights.data();
    auto gw = grad.weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      gw[i] = gw[i] * inv_n + l2 * w[i];
      penalty += w[i] * w[i];
    }
    for (auto& b : grad.bias) b *= inv_n;
  }
  result.loss += 0.5 * l2 * penalty;
  return result;
}

inline BackwardResult backward(const MlpModel& model, const Matrix& x, std::span<const int> y, double l2) {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return backward(model, x, y, rows, l2);
}

// Mini-batch gradient descent with classical momentum:
//   v <- momentum * v - lr * g,  theta <- theta + v.
// Batch order is reshuffled every epoch from a stream derived from `seed`.
// loss_trace[e] is the sample-weighted mean of epoch e's batch losses; with
// one full batch it is exactly the objective before that epoch's update.
inline MlpModel train_mlp(const Matrix& x, std::span<const int> y, const MlpArchitecture& arch, const MlpConfig& config,
                          std::uint64_t seed) {
  if (x.rows() != y.size()) throw Error("train_mlp: feature rows and labels differ in length");
  require_both_classes(y, "train_mlp");
  MlpArchitecture a = arch;
  a.input_width = x.cols();
  MlpModel model = init_mlp(a, seed);
  model.config = config;

  std::vector<DenseLayer> velocity;
  for (const auto& l : model.layers)
    velocity.push_back(DenseLayer{Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size(), 0.0)});

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "mlp_batches"));
  const std::size_t batch = std::min(config.batch_size, order.size());
  model.loss_trace.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const auto rows = std::span<const std::size_t>(order).subspan(start, std::min(batch, order.size() - start));
      const auto step = backward(model, x, y, rows, config.l2);
      if (!std::isfinite(step.loss)) throw TrainingError("train_mlp: non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += step.loss * static_cast<double>(rows.size());
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto w = model.layers[l].weights.data();
        auto vw = velocity[l].weights.data();
        const auto gw = step.gradients.layers[l].weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
          vw[i] = config.momentum * vw[i] - config.learning_rate * gw[i];
          w[i] += vw[i];
        }
        auto& b = model.layers[l].bias;
        auto& vb = velocity[l].bias;
        const auto& gb = step.gradients.layers[l].bias;
        for (std::size_t i = 0; i < b.size(); ++i) {
          vb[i] = config.momentum * vb[i] - config.learning_rate * gb[i];
          b[i] += vb[i];
        }
      }
    }
    model.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return model;
}

class MlpLearner final : public Learner {
 public:
  using Learner::fit;
  MlpLearner(std::string name, std::vector<std::size_t> hidden_widths, MlpConfig config, Activation activation = Activation::relu)
      : name_(std::move(name)), hidden_(std::move(hidden_widths)), config_(config), activation_(activation) {}

  std::string name() const override { return name_; }

  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t seed) const override {
    reject_weights(weights);
    MlpArchitecture arch{train.n_features(), hidden_, activation_};
    return wrap(train_mlp(train.features, train.labels, arch, config_, seed));
  }

 private:
  std::string name_;
  std::vector<std::size_t> hidden_;
  MlpConfig config_;
  Activation activation_;
};

}  // namespace stackgen
