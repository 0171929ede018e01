#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stackgen/metrics.hpp"
#include "stackgen/rng.hpp"

using namespace stackgen;

namespace {

ConfusionMatrix cm_of(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  ConfusionMatrix cm;
  cm.tp = tp;
  cm.tn = tn;
  cm.fp = fp;
  cm.fn = fn;
  return cm;
}

// Pairwise probability that a positive outranks a negative, ties counting half.
double rank_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace

TEST(Confusion, CountsCells) {
  const std::vector<int> predicted = {1, 1, 0, 0, 1, 0};
  const std::vector<int> actual = {1, 0, 0, 1, 1, 0};
  EXPECT_EQ(confusion_matrix(predicted, actual), cm_of(2, 2, 1, 1));
}

TEST(Confusion, RejectsMismatchAndEmpty) {
  const std::vector<int> a = {1, 0};
  const std::vector<int> b = {1};
  EXPECT_THROW(confusion_matrix(a, b), Error);
  EXPECT_THROW(confusion_matrix(std::vector<int>{}, std::vector<int>{}), Error);
}

TEST(Confusion, Accumulates) {
  auto a = cm_of(1, 2, 3, 4);
  a += cm_of(10, 20, 30, 40);
  EXPECT_EQ(a, cm_of(11, 22, 33, 44));
  EXPECT_EQ(a.total(), 110u);
}

TEST(Metrics, WorkedExample) {
  const auto m = metrics_from_confusion(cm_of(50, 40, 5, 5));
  EXPECT_DOUBLE_EQ(*m.accuracy, 0.9);
  EXPECT_DOUBLE_EQ(*m.sensitivity, 50.0 / 55.0);
  EXPECT_DOUBLE_EQ(*m.specificity, 40.0 / 45.0);
  EXPECT_DOUBLE_EQ(*m.ppv, 50.0 / 55.0);
  EXPECT_DOUBLE_EQ(*m.npv, 40.0 / 45.0);
  EXPECT_DOUBLE_EQ(*m.fpr, 5.0 / 45.0);
}

TEST(Metrics, PerfectClassifier) {
  const auto m = metrics_from_confusion(cm_of(7, 3, 0, 0));
  EXPECT_EQ(*m.accuracy, 1.0);
  EXPECT_EQ(*m.sensitivity, 1.0);
  EXPECT_EQ(*m.specificity, 1.0);
  EXPECT_EQ(*m.fpr, 0.0);
}

TEST(Metrics, UndefinedWithoutPositives) {
  const auto m = metrics_from_confusion(cm_of(0, 8, 2, 0));
  EXPECT_FALSE(m.sensitivity.has_value());
  EXPECT_FALSE(m.tpr.has_value());
  EXPECT_EQ(*m.ppv, 0.0);
  EXPECT_DOUBLE_EQ(*m.specificity, 0.8);
  EXPECT_DOUBLE_EQ(*m.accuracy, 0.8);
}

TEST(Metrics, EmptyMatrixThrows) { EXPECT_THROW(metrics_from_confusion(ConfusionMatrix{}), Error); }

TEST(Metrics, Invariants) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto cm = cm_of(rng.below(20), rng.below(20), rng.below(20), rng.below(20) + 1);
    const auto m = metrics_from_confusion(cm);
    EXPECT_EQ(m.sensitivity, m.tpr);
    if (m.specificity) {
      EXPECT_NEAR(*m.fpr, 1.0 - *m.specificity, 1e-15);
    }
    const double lo = std::min(m.sensitivity.value_or(*m.accuracy), m.specificity.value_or(*m.accuracy));
    const double hi = std::max(m.sensitivity.value_or(*m.accuracy), m.specificity.value_or(*m.accuracy));
    EXPECT_GE(*m.accuracy, lo - 1e-15);
    EXPECT_LE(*m.accuracy, hi + 1e-15);
    // Swapping the class roles exchanges sensitivity with specificity and PPV with NPV.
    const auto swapped = metrics_from_confusion(cm_of(cm.tn, cm.tp, cm.fn, cm.fp));
    EXPECT_EQ(swapped.sensitivity, m.specificity);
    EXPECT_EQ(swapped.specificity, m.sensitivity);
    EXPECT_EQ(swapped.ppv, m.npv);
    EXPECT_EQ(swapped.npv, m.ppv);
    EXPECT_EQ(swapped.accuracy, m.accuracy);
  }
}

TEST(Roc, WorkedExample) {
  const std::vector<double> s = {0.9, 0.8, 0.7, 0.6};
  const std::vector<int> y = {1, 0, 1, 0};
  const auto curve = roc_curve(s, y);
  const std::vector<RocPoint> expected = {{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}};
  EXPECT_EQ(curve.points, expected);
  EXPECT_DOUBLE_EQ(auc(curve), 0.75);
  EXPECT_TRUE(std::isinf(curve.thresholds.front()));
}

TEST(Roc, TiesMoveTogether) {
  const std::vector<double> s = {0.5, 0.5, 0.5, 0.5};
  const std::vector<int> y = {1, 0, 1, 0};
  const auto curve = roc_curve(s, y);
  ASSERT_EQ(curve.points.size(), 2u);
  EXPECT_EQ(curve.points[1], (RocPoint{1, 1}));
  EXPECT_DOUBLE_EQ(auc(curve), 0.5);
}

TEST(Roc, PerfectAndInverted) {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  EXPECT_EQ(auc(s, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(auc(s, std::vector<int>{1, 1, 0, 0}), 0.0);
}

TEST(Roc, SingleClassThrows) {
  const std::vector<double> s = {0.1, 0.2};
  EXPECT_THROW(roc_curve(s, std::vector<int>{1, 1}), Error);
  EXPECT_THROW(roc_curve(s, std::vector<int>{0, 0}), Error);
  EXPECT_THROW(roc_curve(s, std::vector<int>{0}), Error);
}

TEST(Roc, AucMatchesPairwiseOracle) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(10)) / 10.0;  // coarse grid forces ties
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(auc(s, y), rank_auc(s, y), 1e-12) << "seed " << seed;
  }
}

TEST(Roc, InvariantUnderMonotoneTransform) {
  Rng rng(5);
  std::vector<double> s(80), t(80);
  std::vector<int> y(80);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform(-3.0, 3.0);
    t[i] = 1.0 / (1.0 + std::exp(-2.0 * s[i]));
    y[i] = static_cast<int>(i % 2);
  }
  EXPECT_NEAR(auc(s, y), auc(t, y), 1e-12);
}

TEST(Roc, CurveIsMonotone) {
  Rng rng(8);
  std::vector<double> s(100);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    y[i] = rng.uniform() < s[i] ? 1 : 0;
  }
  y[0] = 0;
  y[1] = 1;
  const auto curve = roc_curve(s, y);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    EXPECT_GE(curve.points[i].fpr, curve.points[i - 1].fpr);
    EXPECT_GE(curve.points[i].tpr, curve.points[i - 1].tpr);
  }
  EXPECT_EQ(curve.points.back(), (RocPoint{1, 1}));
}
