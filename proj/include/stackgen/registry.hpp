#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/ensemble.hpp"
#include "stackgen/error.hpp"
#include "stackgen/knn.hpp"
#include "stackgen/linear_models.hpp"
#include "stackgen/mlp.hpp"
#include "stackgen/naive_bayes.hpp"
#include "stackgen/params.hpp"
#include "stackgen/stacking.hpp"
#include "stackgen/svm.hpp"
#include "stackgen/tree.hpp"

// Learners by name. Hyperparameters come from `models.<name>.<key>` and
// `ensembles.<name>.<key>` entries of an experiment's Params; anything not
// set keeps the defaults below.
//
//   logistic           lr=0.1 epochs=1000 l2=1e-4                 standardized
//   naive_bayes        var_floor=1e-9
//   knn                k=5 metric=euclidean                       standardized
//   decision_tree      criterion=entropy max_depth=12 min_leaf=2 min_impurity_decrease=1e-7
//   cart               same engine, criterion=gini
//   random_forest      trees=100 max_features=ceil(sqrt(d)) criterion=gini, tree defaults
//   svm                C=1 epochs=1000 lr=0.1 decay_offset=100    standardized
//   linear_regression  (none)
//   mlp                hidden_widths=32,16 lr=0.01 momentum=0.9 batch=32 epochs=500 l2=1e-4, relu, standardized
//   mlp_meta           hidden_widths=16,8 lr=0.001 l2=1e-2, otherwise as mlp, not standardized
//   stump              decision_tree with max_depth=1
//   majority, vote     (none)
//
//   bagging            ensembles.bagging.base=decision_tree ensembles.bagging.B=50
//   boosting           ensembles.boosting.weak=stump ensembles.boosting.T=100 ensembles.boosting.error_floor=1e-10
//   stacking           ensembles.stacking.bases=<seven base rows> ensembles.stacking.meta=mlp_meta
//                      ensembles.stacking.internal_folds=5 ensembles.stacking.naive=false
//
// Every model also accepts `standardize=true|false`.

namespace stackgen {

inline const std::vector<std::string>& default_base_roster() {
  static const std::vector<std::string> roster = {"logistic", "naive_bayes", "knn", "decision_tree", "random_forest", "svm", "cart"};
  return roster;
}

inline const std::vector<std::string>& default_ensemble_roster() {
  static const std::vector<std::string> roster = {"bagging", "boosting", "stacking", "mlp"};
  return roster;
}

inline std::vector<std::string> default_roster() {
  auto r = default_base_roster();
  r.insert(r.end(), default_ensemble_roster().begin(), default_ensemble_roster().end());
  return r;
}

// Report row labels, matching the result tables where a row exists there.
inline std::string display_name(const std::string& id) {
  if (id == "logistic") return "Logistic regression";
  if (id == "naive_bayes") return "Naive Bayes";
  if (id == "knn") return "K-Nearest Neighbors";
  if (id == "decision_tree") return "Decision Tree";
  if (id == "random_forest") return "Random Forest";
  if (id == "svm") return "Support Vector Machine";
  if (id == "cart") return "CART";
  if (id == "linear_regression") return "Linear regression";
  if (id == "bagging") return "Bagging";
  if (id == "boosting") return "Boosting";
  if (id == "stacking") return "Stacking+NN-meta (Deep NN)";
  if (id == "mlp") return "MLP standalone (Deep NN)";
  if (id == "majority") return "Majority baseline";
  return id;
}

inline const std::vector<std::string>& known_learner_ids() {
  static const std::vector<std::string> ids = {"logistic", "naive_bayes", "knn",       "decision_tree", "random_forest",
                                               "svm",      "cart",        "stump",     "linear_regression", "mlp",
                                               "mlp_meta", "majority",    "vote",      "bagging",       "boosting",
                                               "stacking"};
  return ids;
}

inline std::vector<std::size_t> parse_widths(const std::vector<std::string>& items, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& s : items) {
    double v = 0;
    if (!parse_double(s, v) || v < 1 || v != std::floor(v)) throw ConfigError(key + ": hidden width '" + s + "' is not a positive integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

class LearnerRegistry {
 public:
  explicit LearnerRegistry(Params params = {}) : params_(std::move(params)) {}

  LearnerPtr make(const std::string& id) const { return make(id, 0); }

  const Params& params() const noexcept { return params_; }

 private:
  LearnerPtr make(const std::string& id, int depth) const {
    if (depth > 4) throw ConfigError("learner '" + id + "': ensemble nesting is too deep");
    const auto p = params_.scoped("models." + id);
    auto learner = build(id, p, depth);
    const bool scale_default = id == "logistic" || id == "knn" || id == "svm" || id == "mlp";
    if (p.get_bool("standardize", scale_default)) learner = std::make_shared<StandardizedLearner>(learner);
    return learner;
  }

  LearnerPtr build(const std::string& id, const Params& p, int depth) const {
    if (id == "logistic") return std::make_shared<LogisticLearner>(LogisticConfig::from(p));
    if (id == "naive_bayes") return std::make_shared<GaussianNBLearner>(p.get_double("var_floor", kDefaultVarianceFloor));
    if (id == "knn") {
      const auto k = p.get_int("k", 5);
      if (k < 1) throw ConfigError("knn: k must be at least 1");
      return std::make_shared<KnnLearner>(static_cast<std::size_t>(k), parse_metric(p.get_string("metric", "euclidean")));
    }
    if (id == "decision_tree") return std::make_shared<TreeLearner>(id, TreeParams::from(p, TreeParams{Criterion::entropy}));
    if (id == "cart") return std::make_shared<TreeLearner>(id, TreeParams::from(p, TreeParams{Criterion::gini}));
    if (id == "stump") {
      TreeParams stump{Criterion::entropy};
      stump.max_depth = 1;
      stump.min_samples_leaf = 1;
      return std::make_shared<TreeLearner>(id, TreeParams::from(p, stump));
    }
    if (id == "random_forest") {
      const auto trees = p.get_int("trees", 100);
      if (trees < 1) throw ConfigError("random_forest: trees must be at least 1");
      const auto m = p.get_int("max_features", 0);
      if (m < 0) throw ConfigError("random_forest: max_features must be non-negative");
      auto tp = TreeParams::from(p, TreeParams{Criterion::gini});
      return std::make_shared<RandomForestLearner>(static_cast<std::size_t>(trees), tp, static_cast<std::size_t>(m));
    }
    if (id == "svm") return std::make_shared<LinearSvmLearner>(SvmConfig::from(p));
    if (id == "linear_regression") return std::make_shared<LinearRegressionLearner>();
    if (id == "mlp" || id == "mlp_meta") {
      const std::vector<std::string> fallback = id == "mlp" ? std::vector<std::string>{"32", "16"} : std::vector<std::string>{"16", "8"};
      auto widths = parse_widths(p.get_list("hidden_widths", fallback), "models." + id + ".hidden_widths");
      MlpConfig defaults;
      if (id == "mlp_meta") {
        defaults.learning_rate = 0.001;
        defaults.l2 = 1e-2;
      }
      return std::make_shared<MlpLearner>(id, std::move(widths), MlpConfig::from(p, defaults),
                                          parse_activation(p.get_string("activation", "relu")));
    }
    if (id == "majority") return std::make_shared<MajorityLearner>();
    if (id == "vote") return std::make_shared<VoteLearner>();

    if (id == "bagging") {
      const auto e = params_.scoped("ensembles.bagging");
      const auto b = e.get_int("B", 50);
      if (b < 1) throw ConfigError("ensembles.bagging.B must be at least 1");
      return std::make_shared<BaggingLearner>(make(e.get_string("base", "decision_tree"), depth + 1), static_cast<std::size_t>(b));
    }
    if (id == "boosting") {
      const auto e = params_.scoped("ensembles.boosting");
      const auto t = e.get_int("T", 100);
      if (t < 1) throw ConfigError("ensembles.boosting.T must be at least 1");
      return std::make_shared<AdaBoostLearner>(make(e.get_string("weak", "stump"), depth + 1), static_cast<std::size_t>(t),
                                               e.get_double("error_floor", kDefaultErrorFloor));
    }
    if (id == "stacking") {
      const auto e = params_.scoped("ensembles.stacking");
      std::vector<LearnerPtr> bases;
      for (const auto& b : e.get_list("bases", default_base_roster())) bases.push_back(make(b, depth + 1));
      const auto folds = e.get_int("internal_folds", 5);
      if (folds < 2) throw ConfigError("ensembles.stacking.internal_folds must be at least 2");
      const auto mode = e.get_bool("naive", false) ? StackingMode::naive : StackingMode::out_of_fold;
      return std::make_shared<StackingLearner>(id, std::move(bases), make(e.get_string("meta", "mlp_meta"), depth + 1),
                                               static_cast<std::size_t>(folds), mode);
    }
    throw ConfigError("unknown learner '" + id + "'");
  }

  Params params_;
};

}  // namespace stackgen
