#include <gtest/gtest.h>

#include <cmath>

#include "stackgen/experiment.hpp"
#include "test_support.hpp"

using namespace stackgen;

namespace {

// 60 negatives then 40 positives; the feature carries a weak signal.
Dataset skewed(std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(100, 2);
  std::vector<int> y(100);
  for (std::size_t r = 0; r < 100; ++r) {
    y[r] = r < 60 ? 0 : 1;
    x(r, 0) = rng.uniform(-1.0, 1.0) + 0.8 * y[r];
    x(r, 1) = rng.uniform(-1.0, 1.0);
  }
  return make_dataset(std::move(x), std::move(y));
}

DatasetLoader memory_loader() {
  return [](const std::string& name) {
    LoadedDataset d;
    d.name = name;
    d.data = name == "blobs" ? test::blobs(90, 3, 1.0, 5) : skewed(1);
    if (name == "inverted") {
      // Raw values at or above 0.5 mark the negatives, which a vote reads the wrong way round.
      for (std::size_t r = 0; r < d.data.size(); ++r)
        for (std::size_t c = 0; c < d.data.n_features(); ++c) d.data.features(r, c) = d.data.labels[r] == 0 ? 0.9 : 0.1;
    }
    d.sentinels.assign(d.data.n_features(), std::nullopt);
    return d;
  };
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.datasets = {"skewed", "blobs"};
  cfg.k = 5;
  cfg.seed = 3;
  cfg.roster = {"majority", "naive_bayes", "stump", "logistic"};
  cfg.learner_params.set("models.logistic.epochs", "100");
  return cfg;
}

}  // namespace

TEST(Experiment, MajorityBaselineMatchesMajorityRate) {
  auto cfg = small_config();
  cfg.datasets = {"skewed"};
  cfg.roster = {"majority"};
  const auto report = run_experiment(cfg, memory_loader());
  const auto* row = report.find("skewed", "majority");
  ASSERT_NE(row, nullptr);
  EXPECT_DOUBLE_EQ(*row->mean.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(*row->mean.specificity, 1.0);
  EXPECT_DOUBLE_EQ(*row->mean.sensitivity, 0.0);
  EXPECT_DOUBLE_EQ(*row->mean.auc, 0.5);
  EXPECT_FALSE(row->mean.ppv.has_value());
  EXPECT_DOUBLE_EQ(report.summary("skewed")->majority_rate, 0.6);
}

TEST(Experiment, RowsFollowRosterAndDatasets) {
  const auto cfg = small_config();
  const auto report = run_experiment(cfg, memory_loader());
  ASSERT_EQ(report.rows.size(), 8u);
  std::size_t i = 0;
  for (const auto& d : cfg.datasets) {
    for (const auto& m : cfg.roster) {
      EXPECT_EQ(report.rows[i].dataset, d);
      EXPECT_EQ(report.rows[i].model, m);
      EXPECT_EQ(report.rows[i].label, display_name(m));
      ++i;
    }
  }
  EXPECT_EQ(report.seed, 3u);
  EXPECT_EQ(report.k, 5u);
  EXPECT_EQ(report.config_sha256, cfg.hash());
}

TEST(Experiment, EveryRowEvaluatesEverySampleOnce) {
  const auto report = run_experiment(small_config(), memory_loader());
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.folds.size(), 5u);
    EXPECT_EQ(row.evaluated(), report.summary(row.dataset)->samples);
    ConfusionMatrix pooled;
    for (const auto& f : row.folds) pooled += f.confusion;
    EXPECT_EQ(pooled.total(), row.evaluated());
    for (const double s : row.oof_scores) {
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
    }
  }
}

TEST(Experiment, MeansAreUnweightedFoldMeans) {
  const auto report = run_experiment(small_config(), memory_loader());
  for (const auto& row : report.rows) {
    double sum = 0.0;
    for (const auto& f : row.folds) sum += *f.metrics.accuracy;
    EXPECT_NEAR(*row.mean.accuracy, sum / static_cast<double>(row.folds.size()), 1e-15);
  }
}

TEST(Experiment, Deterministic) {
  const auto a = run_experiment(small_config(), memory_loader());
  const auto b = run_experiment(small_config(), memory_loader());
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].oof_scores, b.rows[i].oof_scores);
    EXPECT_EQ(a.rows[i].mean.accuracy, b.rows[i].mean.accuracy);
  }
}

TEST(Experiment, SeedsSeparateJobs) {
  EXPECT_NE(job_seed(42, "pima", "knn", 0), job_seed(42, "pima", "knn", 1));
  EXPECT_NE(job_seed(42, "pima", "knn", 0), job_seed(42, "wdbc", "knn", 0));
  EXPECT_NE(job_seed(42, "pima", "knn", 0), job_seed(42, "pima", "svm", 0));
  EXPECT_NE(fold_plan_seed(42, "pima"), fold_plan_seed(43, "pima"));
}

TEST(Experiment, StackingRowCarriesAudit) {
  auto cfg = small_config();
  cfg.datasets = {"blobs"};
  cfg.roster = {"stacking"};
  cfg.learner_params.set("ensembles.stacking.bases", "naive_bayes, stump");
  cfg.learner_params.set("ensembles.stacking.meta", "logistic");
  cfg.learner_params.set("ensembles.stacking.internal_folds", "3");
  const auto report = run_experiment(cfg, memory_loader());
  const auto& row = report.rows.at(0);
  ASSERT_TRUE(row.meta_training_accuracy.has_value());
  EXPECT_TRUE(*row.leakage_free);
  cfg.set_stacking_naive(true);
  const auto naive = run_experiment(cfg, memory_loader());
  EXPECT_FALSE(*naive.rows.at(0).leakage_free);
}

TEST(Experiment, StrictModeRejectsWeakModels) {
  auto cfg = small_config();
  cfg.datasets = {"inverted"};
  cfg.roster = {"vote"};
  cfg.strict = false;
  const auto loose = run_experiment(cfg, memory_loader());
  ASSERT_LT(*loose.rows[0].mean.accuracy, 0.57);
  cfg.strict = true;
  EXPECT_THROW(run_experiment(cfg, memory_loader()), Error);
}

TEST(Experiment, ErrorsCarryContext) {
  auto cfg = small_config();
  cfg.datasets = {"skewed"};
  cfg.roster = {"naive_bayes"};
  const DatasetLoader broken = [](const std::string&) -> LoadedDataset { throw ParseError("bad row", 12); };
  try {
    run_experiment(cfg, broken);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("skewed"), std::string::npos);
  }
  cfg.roster = {"knn"};
  cfg.learner_params.set("models.knn.k", "500");
  try {
    run_experiment(cfg, memory_loader());
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("knn"), std::string::npos);
    EXPECT_NE(msg.find("fold 0"), std::string::npos);
  }
}

TEST(Experiment, InvalidConfigRejectedBeforeLoading) {
  auto cfg = small_config();
  cfg.roster = {"perceptron"};
  bool loaded = false;
  const DatasetLoader spy = [&](const std::string& n) {
    loaded = true;
    return memory_loader()(n);
  };
  EXPECT_THROW(run_experiment(cfg, spy), ConfigError);
  EXPECT_FALSE(loaded);
}

TEST(Experiment, RealPimaWithImputation) {
  ExperimentConfig cfg;
  cfg.datasets = {"pima"};
  cfg.roster = {"naive_bayes"};
  const auto path = test::data_dir() / "pima-indians-diabetes.data";
  const DatasetLoader loader = [&](const std::string& n) { return load_dataset_file(n, path, builtin_schema(n)); };
  const auto report = run_experiment(cfg, loader);
  const auto* d = report.summary("pima");
  EXPECT_EQ(d->samples, 768u);
  EXPECT_EQ(d->sha256, sha256_file(path));
  EXPECT_GT(*report.rows[0].mean.accuracy, d->majority_rate + 0.03);
}
