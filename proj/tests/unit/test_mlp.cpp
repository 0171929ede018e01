#include <gtest/gtest.h>

#include <cmath>

#include "stackgen/linear_models.hpp"
#include "stackgen/mlp.hpp"
#include "test_support.hpp"

using namespace stackgen;

namespace {

std::vector<double> pack(const std::vector<DenseLayer>& layers) {
  std::vector<double> out;
  for (const auto& l : layers) {
    out.insert(out.end(), l.weights.data().begin(), l.weights.data().end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void unpack(std::span<const double> params, std::vector<DenseLayer>& layers) {
  std::size_t i = 0;
  for (auto& l : layers) {
    for (auto& w : l.weights.data()) w = params[i++];
    for (auto& b : l.bias) b = params[i++];
  }
}

// Random weights and biases so no gradient is trivially zero.
MlpModel random_model(const MlpArchitecture& arch, std::uint64_t seed) {
  auto m = init_mlp(arch, seed);
  Rng rng(seed + 1000);
  for (auto& l : m.layers) {
    for (auto& w : l.weights.data()) w = rng.uniform(-1, 1);
    for (auto& b : l.bias) b = rng.uniform(-0.5, 0.5);
  }
  return m;
}

double gradient_error(MlpModel model, const Dataset& d, double l2) {
  const auto analytic = pack(backward(model, d.features, d.labels, l2).gradients.layers);
  const auto numeric = test::central_difference(
      [&](std::span<const double> p) {
        auto copy = model;
        unpack(p, copy.layers);
        return backward(copy, d.features, d.labels, l2).loss;
      },
      pack(model.layers), 1e-5);
  return test::relative_error(analytic, numeric);
}

Dataset xor_points() { return test::dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0}); }

}  // namespace

TEST(Mlp, InitShapesAndScaling) {
  const auto m = init_mlp(MlpArchitecture{4, {8}, Activation::relu}, 1);
  ASSERT_EQ(m.layers.size(), 2u);
  EXPECT_EQ(m.layers[0].weights.rows(), 8u);
  EXPECT_EQ(m.layers[0].weights.cols(), 4u);
  EXPECT_EQ(m.layers[1].weights.rows(), 1u);
  EXPECT_EQ(m.layers[1].weights.cols(), 8u);
  for (const auto& l : m.layers) {
    for (const double b : l.bias) EXPECT_EQ(b, 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.weights.cols()));
    for (const double w : l.weights.data()) EXPECT_LE(std::abs(w), bound);
  }
}

TEST(Mlp, InitDeterministic) {
  const MlpArchitecture arch{3, {5, 2}, Activation::relu};
  EXPECT_EQ(init_mlp(arch, 9).layers, init_mlp(arch, 9).layers);
  EXPECT_NE(init_mlp(arch, 9).layers, init_mlp(arch, 10).layers);
}

TEST(Mlp, FanInScaling) {
  double wide = 0.0, narrow = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto w100 = init_mlp(MlpArchitecture{100, {}, Activation::relu}, seed);
    const auto w4 = init_mlp(MlpArchitecture{4, {}, Activation::relu}, seed);
    for (const double w : w100.layers[0].weights.data()) wide = std::max(wide, std::abs(w));
    for (const double w : w4.layers[0].weights.data()) narrow = std::max(narrow, std::abs(w));
  }
  EXPECT_LT(wide, narrow);
}

TEST(Mlp, ZeroWeightsGiveHalf) {
  auto m = init_mlp(MlpArchitecture{3, {4}, Activation::relu}, 0);
  for (auto& l : m.layers)
    for (auto& w : l.weights.data()) w = 0.0;
  EXPECT_EQ(forward(m, std::vector<double>{1, 2, 3}), 0.5);
}

TEST(Mlp, NoHiddenLayersIsLogisticForm) {
  auto m = init_mlp(MlpArchitecture{2, {}, Activation::relu}, 0);
  m.layers[0].weights(0, 0) = 0.7;
  m.layers[0].weights(0, 1) = -1.3;
  m.layers[0].bias[0] = 0.2;
  const std::vector<double> x = {0.5, 2.0};
  EXPECT_DOUBLE_EQ(forward(m, x), sigmoid(0.2 + 0.7 * 0.5 - 1.3 * 2.0));
}

TEST(Mlp, TinyIdentityNetwork) {
  auto m = init_mlp(MlpArchitecture{1, {1}, Activation::identity}, 0);
  m.layers[0].weights(0, 0) = 1.0;
  m.layers[1].weights(0, 0) = 1.0;
  EXPECT_NEAR(forward(m, std::vector<double>{2.0}), 0.880797, 1e-6);
}

TEST(Mlp, WidthMismatchIsError) {
  const auto m = init_mlp(MlpArchitecture{3, {2}, Activation::relu}, 0);
  EXPECT_THROW(forward(m, std::vector<double>{1, 2}), Error);
}

TEST(Mlp, GradientCheckReferenceNetwork) {
  const auto d = test::random_dataset(12, 4, 77);
  EXPECT_LE(gradient_error(random_model(MlpArchitecture{4, {5, 3}, Activation::relu}, 5), d, 1e-3), 1e-4);
  EXPECT_LE(gradient_error(random_model(MlpArchitecture{4, {5, 3}, Activation::tanh}, 5), d, 1e-3), 1e-4);
}

TEST(Mlp, GradientCheckRandomConfigurations) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    MlpArchitecture arch;
    arch.input_width = 1 + rng.below(5);
    const auto depth = rng.below(4);
    for (std::uint64_t l = 0; l < depth; ++l) arch.hidden_widths.push_back(1 + rng.below(6));
    arch.hidden_activation = seed % 3 == 0 ? Activation::identity : Activation::tanh;
    const auto d = test::random_dataset(3 + rng.below(15), arch.input_width, seed + 50);
    EXPECT_LE(gradient_error(random_model(arch, seed), d, rng.uniform(0, 0.01)), 1e-4) << "seed " << seed;
  }
}

TEST(Mlp, DuplicatedBatchLeavesLossAndGradient) {
  const auto d = test::random_dataset(10, 3, 4);
  std::vector<std::size_t> rows, twice;
  for (std::size_t r = 0; r < 10; ++r) {
    rows.push_back(r);
    twice.push_back(r);
    twice.push_back(r);
  }
  const auto m = random_model(MlpArchitecture{3, {4}, Activation::tanh}, 2);
  const auto a = backward(m, d.features, d.labels, rows, 1e-3);
  const auto b = backward(m, d.features, d.labels, twice, 1e-3);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  EXPECT_LE(test::relative_error(pack(a.gradients.layers), pack(b.gradients.layers)), 1e-12);
}

TEST(Mlp, PerfectPredictionLeavesOnlyL2Gradient) {
  auto m = init_mlp(MlpArchitecture{1, {}, Activation::relu}, 0);
  m.layers[0].weights(0, 0) = 40.0;
  const auto d = test::dataset({{-1}, {1}}, {0, 1});
  const double l2 = 1e-3;
  const auto r = backward(m, d.features, d.labels, l2);
  const double l2_norm = l2 * 40.0;
  EXPECT_LE(std::sqrt(r.gradients.squared_norm()), l2_norm + 1e-6);
}

TEST(Mlp, TrainsXor) {
  const auto d = xor_points();
  MlpConfig cfg;
  cfg.epochs = 2000;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.1;
  cfg.l2 = 0.0;
  const auto m = train_mlp(d.features, d.labels, MlpArchitecture{2, {8}, Activation::tanh}, cfg, 3);
  EXPECT_EQ(accuracy_on(*wrap(m), d), 1.0);
}

TEST(Mlp, ZeroHiddenSeparable) {
  const auto d = test::dataset({{-2}, {-1}, {1}, {2}}, {0, 0, 1, 1});
  MlpConfig cfg;
  cfg.epochs = 300;
  const auto m = train_mlp(d.features, d.labels, MlpArchitecture{1, {}, Activation::relu}, cfg, 1);
  EXPECT_EQ(accuracy_on(*wrap(m), d), 1.0);
}

TEST(Mlp, FullBatchConvexLossMonotone) {
  const auto d = test::blobs(60, 2, 1.0, 5);
  MlpConfig cfg;
  cfg.batch_size = 60;
  cfg.momentum = 0.0;
  cfg.learning_rate = 0.05;
  cfg.epochs = 200;
  const auto m = train_mlp(d.features, d.labels, MlpArchitecture{2, {}, Activation::relu}, cfg, 1);
  for (std::size_t i = 1; i < m.loss_trace.size(); ++i) EXPECT_LE(m.loss_trace[i], m.loss_trace[i - 1] + 1e-9);
}

TEST(Mlp, ZeroHiddenMatchesLogisticRegression) {
  // Overlapping classes give a unique regularized optimum for both trainers.
  const auto d = test::blobs(200, 2, 1.0, 13);
  MlpConfig cfg;
  cfg.batch_size = d.size();
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.9;
  cfg.epochs = 3000;
  cfg.l2 = 1e-4;
  const auto net = train_mlp(d.features, d.labels, MlpArchitecture{2, {}, Activation::relu}, cfg, 2);
  LogisticConfig lc;
  lc.epochs = 5000;
  const auto lr = fit_logistic_regression(d, lc);
  double worst = 0.0;
  for (std::size_t r = 0; r < d.size(); ++r)
    worst = std::max(worst, std::abs(net.predict_proba(d.features.row(r)) - lr.predict_proba(d.features.row(r))));
  EXPECT_LE(worst, 0.01);
}

TEST(Mlp, DeterministicTraining) {
  const auto d = test::blobs(50, 3, 1.0, 1);
  MlpConfig cfg;
  cfg.epochs = 20;
  const MlpArchitecture arch{3, {4}, Activation::relu};
  EXPECT_EQ(train_mlp(d.features, d.labels, arch, cfg, 8).layers, train_mlp(d.features, d.labels, arch, cfg, 8).layers);
}

TEST(Mlp, DivergenceReportsEpoch) {
  const auto d = test::blobs(50, 3, 1.0, 1);
  auto scaled = d;
  for (auto& v : scaled.features.data()) v *= 1e200;
  MlpConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 1e10;
  try {
    train_mlp(scaled.features, scaled.labels, MlpArchitecture{3, {4}, Activation::identity}, cfg, 1);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Mlp, ConfigFromParams) {
  const auto c = MlpConfig::from(Params{{"lr", "0.2"}, {"momentum", "0.5"}, {"batch", "8"}, {"epochs", "3"}, {"l2", "0"}}, MlpConfig{});
  EXPECT_EQ(c.learning_rate, 0.2);
  EXPECT_EQ(c.momentum, 0.5);
  EXPECT_EQ(c.batch_size, 8u);
  EXPECT_EQ(c.epochs, 3u);
  EXPECT_EQ(c.l2, 0.0);
}
