#include <gtest/gtest.h>

#include <cmath>

#include "stackgen/naive_bayes.hpp"
#include "test_support.hpp"

using namespace stackgen;

TEST(NaiveBayes, HandComputedPosterior) {
  GaussianNBModel m;
  m.prior = {0.5, 0.5};
  m.mean = {std::vector<double>{0.0}, std::vector<double>{2.0}};
  m.variance = {std::vector<double>{1.0}, std::vector<double>{1.0}};
  EXPECT_NEAR(m.predict_proba(std::vector<double>{0.5}), 1.0 / (1.0 + std::exp(1.0)), 1e-12);
  EXPECT_NEAR(m.predict_proba(std::vector<double>{0.5}), 0.2689, 5e-5);
}

TEST(NaiveBayes, SymmetricMeansGiveHalf) {
  const auto m = fit_gaussian_nb(test::dataset({{-1}, {-1}, {1}, {1}}, {0, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(m.prior[0], 0.5);
  EXPECT_NEAR(m.predict_proba(std::vector<double>{0.0}), 0.5, 1e-12);
}

TEST(NaiveBayes, IdenticalClassDistributionsGiveHalf) {
  const auto m = fit_gaussian_nb(test::dataset({{1, 5}, {3, 7}, {1, 5}, {3, 7}}, {0, 0, 1, 1}));
  EXPECT_NEAR(m.predict_proba(std::vector<double>{2.5, 0.0}), 0.5, 1e-12);
}

TEST(NaiveBayes, MaximumLikelihoodParameters) {
  const auto m = fit_gaussian_nb(test::dataset({{1}, {3}, {10}, {10}, {13}, {13}}, {0, 0, 1, 1, 1, 1}));
  EXPECT_NEAR(m.prior[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.prior[1], 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.mean[0][0], 2.0);
  EXPECT_DOUBLE_EQ(m.mean[1][0], 11.5);
  EXPECT_DOUBLE_EQ(m.variance[0][0], 1.0);
  EXPECT_DOUBLE_EQ(m.variance[1][0], 2.25);
}

TEST(NaiveBayes, PosteriorSumsToOne) {
  const auto d = test::blobs(100, 4, 1.0, 3);
  const auto m = fit_gaussian_nb(d);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-10, 10);
    const auto p = m.posterior(x);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  }
}

TEST(NaiveBayes, ConstantFeatureUsesVarianceFloor) {
  const auto m = fit_gaussian_nb(test::dataset({{1, 0}, {2, 0}, {5, 0}, {6, 0}}, {0, 0, 1, 1}));
  EXPECT_GT(m.variance[0][1], 0.0);
  const double p = m.predict_proba(std::vector<double>{1.5, 0.0});
  EXPECT_TRUE(std::isfinite(p));
  EXPECT_LT(p, 0.5);
}

TEST(NaiveBayes, LabelSwapIsExactMirror) {
  const auto d = test::blobs(60, 3, 1.5, 12);
  auto swapped = d;
  for (auto& y : swapped.labels) y = 1 - y;
  const auto a = fit_gaussian_nb(d);
  const auto b = fit_gaussian_nb(swapped);
  for (std::size_t r = 0; r < d.size(); ++r) EXPECT_NEAR(a.predict_proba(d.features.row(r)), 1.0 - b.predict_proba(d.features.row(r)), 1e-12);
}

TEST(NaiveBayes, SingleClassIsError) { EXPECT_THROW(fit_gaussian_nb(test::dataset({{1}, {2}}, {0, 0})), TrainingError); }
