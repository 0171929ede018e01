#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>

#include "stackgen/ensemble.hpp"
#include "stackgen/preprocess.hpp"
#include "test_support.hpp"

using namespace stackgen;

namespace {

std::shared_ptr<TreeLearner> stump() {
  TreeParams p;
  p.max_depth = 1;
  p.min_samples_leaf = 1;
  return std::make_shared<TreeLearner>("stump", p);
}

// Two informative features plus label noise.
Dataset noisy(std::size_t n, std::uint64_t seed) {
  auto d = test::blobs(n, 2, 1.0, seed);
  Rng rng(seed + 7);
  for (auto& y : d.labels)
    if (rng.uniform() < 0.15) y = 1 - y;
  return d;
}

double cv_accuracy(const Learner& learner, const Dataset& d, std::uint64_t seed) {
  const auto plan = stratified_kfold(d, 5, seed);
  double acc = 0.0;
  for (std::size_t f = 0; f < plan.folds.size(); ++f)
    acc += accuracy_on(*learner.fit(d.subset(plan.folds[f].train), derive_seed(seed, f)), d.subset(plan.folds[f].test));
  return acc / static_cast<double>(plan.folds.size());
}

double variance(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(Bagging, MeanOfConstants) {
  const auto d = test::random_dataset(20, 2, 1);
  const auto bag = fit_bagging(ConstantLearner(0.7), 3, d, 5);
  EXPECT_DOUBLE_EQ(bag->predict_proba(std::vector<double>{0, 0}), 0.7);
}

TEST(Bagging, SingleMemberWithoutBootstrapEqualsBase) {
  const auto d = test::blobs(60, 3, 1.0, 2);
  const auto base = stump();
  const auto bag = fit_bagging(*base, 1, d, 5, /*bootstrap=*/false);
  const auto single = base->fit(d, bag->seeds[0]);
  for (std::size_t r = 0; r < d.size(); ++r) EXPECT_EQ(bag->predict_proba(d.features.row(r)), single->predict_proba(d.features.row(r)));
}

TEST(Bagging, ProbabilityWithinMemberRange) {
  const auto d = test::blobs(80, 3, 0.5, 3);
  const auto bag = fit_bagging(TreeLearner("decision_tree", TreeParams{}), 10, d, 1);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    double lo = 1.0, hi = 0.0;
    for (const auto& m : bag->models) {
      lo = std::min(lo, m->predict_proba(x));
      hi = std::max(hi, m->predict_proba(x));
    }
    EXPECT_GE(bag->predict_proba(x), lo - 1e-15);
    EXPECT_LE(bag->predict_proba(x), hi + 1e-15);
  }
}

TEST(Bagging, StumpVarianceReduction) {
  const auto d = noisy(200, 4);
  const auto base = stump();
  const BaggingLearner bag(base, 25);
  std::vector<double> single_acc, bag_acc;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    single_acc.push_back(cv_accuracy(*base, d, seed));
    bag_acc.push_back(cv_accuracy(bag, d, seed));
  }
  EXPECT_LE(variance(bag_acc), variance(single_acc));
}

TEST(Bagging, RejectsZeroMembers) { EXPECT_THROW(fit_bagging(ConstantLearner(0.5), 0, test::random_dataset(5, 1, 0), 0), ConfigError); }

TEST(AdaBoost, StageWeightValues) {
  EXPECT_NEAR(adaboost_stage_weight(0.25), 0.549306, 1e-6);
  EXPECT_DOUBLE_EQ(adaboost_stage_weight(0.25), 0.5 * std::log(3.0));
  EXPECT_DOUBLE_EQ(adaboost_stage_weight(0.5), 0.0);
  EXPECT_DOUBLE_EQ(adaboost_stage_weight(0.0), 0.5 * std::log((1.0 - 1e-10) / 1e-10));
  EXPECT_TRUE(std::isfinite(adaboost_stage_weight(0.0)));
}

TEST(AdaBoost, SingleRoundMatchesWeakLearner) {
  const auto d = test::blobs(80, 2, 1.0, 5);
  const auto weak = stump();
  const auto boosted = fit_adaboost(*weak, 1, d, 3);
  ASSERT_EQ(boosted->stages.size(), 1u);
  EXPECT_GT(boosted->stages[0].alpha, 0.0);
  for (std::size_t r = 0; r < d.size(); ++r)
    EXPECT_EQ(boosted->predict(d.features.row(r)), boosted->stages[0].model->predict(d.features.row(r)));
}

TEST(AdaBoost, StopsWhenWeakLearnerIsUninformative) {
  const auto d = test::random_dataset(20, 2, 1);
  const auto boosted = fit_adaboost(ConstantLearner(0.5), 10, d, 0);
  const auto positives = std::count(d.labels.begin(), d.labels.end(), 1);
  if (positives * 2 <= static_cast<long>(d.size())) {
    EXPECT_TRUE(boosted->stages.empty());
    EXPECT_EQ(boosted->predict_proba(std::vector<double>{0, 0}), 0.5);
  }
}

TEST(AdaBoost, StopsAfterPerfectStage) {
  const auto d = test::dataset({{0}, {1}, {2}, {3}}, {0, 0, 1, 1});
  const auto boosted = fit_adaboost(*stump(), 10, d, 0);
  ASSERT_EQ(boosted->stages.size(), 1u);
  EXPECT_EQ(boosted->stages[0].weighted_error, 0.0);
}

TEST(AdaBoost, WeightsStayDistributions) {
  const auto d = noisy(150, 8);
  const auto boosted = fit_adaboost(*stump(), 40, d, 1);
  for (const auto& w : boosted->weight_history) {
    double s = 0.0;
    for (const double v : w) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(AdaBoost, MisclassifiedWeightsGrowByExpAlpha) {
  const auto d = noisy(60, 2);
  const auto boosted = fit_adaboost(*stump(), 2, d, 1);
  ASSERT_EQ(boosted->weight_history.size(), 2u);
  const auto& stage = boosted->stages[0];
  const auto& w0 = boosted->weight_history[0];
  const auto& w1 = boosted->weight_history[1];
  double total = 0.0;
  std::vector<double> raw(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool wrong = stage.model->predict(d.features.row(i)) != d.labels[i];
    raw[i] = w0[i] * (wrong ? std::exp(stage.alpha) : 1.0);
    total += raw[i];
  }
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(w1[i], raw[i] / total, 1e-15);
}

TEST(AdaBoost, TrainingErrorNonIncreasingOnFixedSet) {
  const auto d = test::blobs(120, 2, 1.0, 9);
  const auto full = fit_adaboost(*stump(), 30, d, 2);
  ASSERT_EQ(full->stages.size(), 30u);
  double previous_error = 1.0;
  for (std::size_t t = 1; t <= full->stages.size(); ++t) {
    AdaBoostModel prefix;
    prefix.stages.assign(full->stages.begin(), full->stages.begin() + static_cast<std::ptrdiff_t>(t));
    EXPECT_LT(prefix.stages.back().weighted_error, 0.5);
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < d.size(); ++r) wrong += prefix.predict(d.features.row(r)) != d.labels[r] ? 1 : 0;
    const double error = static_cast<double>(wrong) / static_cast<double>(d.size());
    EXPECT_LE(error, previous_error + 1e-12) << "round " << t;
    previous_error = error;
  }
}

TEST(AdaBoost, RequiresWeightSupport) {
  const auto d = test::random_dataset(10, 1, 0);
  EXPECT_THROW(fit_adaboost(MajorityLearner(), 5, d, 0), ConfigError);
  EXPECT_THROW(AdaBoostLearner(std::make_shared<MajorityLearner>(), 5), ConfigError);
}
