#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stackgen/classifier.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/error.hpp"
#include "stackgen/params.hpp"
#include "stackgen/rng.hpp"

namespace stackgen {

enum class Criterion { entropy, gini };

inline Criterion parse_criterion(const std::string& s) {
  if (s == "entropy") return Criterion::entropy;
  if (s == "gini") return Criterion::gini;
  throw ConfigError("unknown split criterion '" + s + "'");
}

// Impurity of a node holding class weights (w0, w1).
inline double impurity(Criterion criterion, double w0, double w1) {
  const double total = w0 + w1;
  if (total <= 0.0) return 0.0;
  const double p0 = w0 / total;
  const double p1 = w1 / total;
  if (criterion == Criterion::gini) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

namespace detail {
inline std::pair<double, double> tally(std::span<const int> labels, const char* who) {
  if (labels.empty()) throw Error(std::string(who) + ": empty label vector");
  double ones = 0.0;
  for (const int y : labels) ones += y == 1 ? 1.0 : 0.0;
  return {static_cast<double>(labels.size()) - ones, ones};
}
}  // namespace detail

// Shannon entropy in bits, with 0 log 0 = 0.
inline double entropy(std::span<const int> labels) {
  const auto [w0, w1] = detail::tally(labels, "entropy");
  return impurity(Criterion::entropy, w0, w1);
}

inline double gini_impurity(std::span<const int> labels) {
  const auto [w0, w1] = detail::tally(labels, "gini_impurity");
  return impurity(Criterion::gini, w0, w1);
}

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

// Exhaustive search over midpoints between consecutive distinct values of
// each candidate feature, restricted to `rows`. Decrease is the parent
// impurity minus the weight-averaged child impurities. The first maximum in
// (feature index, threshold) order wins. Empty `weights` means unit weights.
inline std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                                std::span<const double> weights, std::span<const std::size_t> candidate_features,
                                                Criterion criterion, std::size_t min_leaf = 1) {
  if (rows.size() < 2) return std::nullopt;
  const auto weight = [&](std::size_t r) { return weights.empty() ? 1.0 : weights[r]; };
  double total[2] = {0.0, 0.0};
  for (const auto r : rows) total[y[r]] += weight(r);
  const double node_weight = total[0] + total[1];
  if (node_weight <= 0.0) return std::nullopt;
  const double parent = impurity(criterion, total[0], total[1]);
  if (parent <= 0.0) return std::nullopt;

  std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());

  std::optional<SplitCandidate> best;
  std::vector<std::pair<double, std::size_t>> column(rows.size());
  for (const auto f : features) {
    for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x(rows[i], f), rows[i]};
    std::sort(column.begin(), column.end());
    double left[2] = {0.0, 0.0};
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      const auto r = column[i].second;
      left[y[r]] += weight(r);
      const double lo = column[i].first;
      const double hi = column[i + 1].first;
      if (!(lo < hi)) continue;
      const std::size_t n_left = i + 1;
      if (n_left < min_leaf || column.size() - n_left < min_leaf) continue;
      const double right0 = total[0] - left[0];
      const double right1 = total[1] - left[1];
      const double wl = left[0] + left[1];
      const double wr = right0 + right1;
      const double decrease =
          parent - (wl / node_weight) * impurity(criterion, left[0], left[1]) - (wr / node_weight) * impurity(criterion, right0, right1);
      if (decrease > 0.0 && (!best || decrease > best->impurity_decrease)) {
        double threshold = lo + 0.5 * (hi - lo);
        if (!(threshold > lo)) threshold = hi;
        best = SplitCandidate{f, threshold, decrease};
      }
    }
  }
  return best;
}

// All rows, unit weights.
inline std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const int> y,
                                                std::span<const std::size_t> candidate_features, Criterion criterion) {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return best_split(x, y, rows, {}, candidate_features, criterion);
}

struct TreeParams {
  Criterion criterion = Criterion::entropy;
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 2;
  double min_impurity_decrease = 1e-7;
  std::size_t max_features = 0;  // features drawn per split; 0 means all

  void validate() const {
    if (max_depth < 1) throw ConfigError("tree: max_depth must be at least 1");
    if (min_samples_leaf < 1) throw ConfigError("tree: min_leaf must be at least 1");
  }

  static TreeParams from(const Params& p, TreeParams defaults);
};

inline TreeParams TreeParams::from(const Params& p, TreeParams defaults) {
  TreeParams t = defaults;
  if (p.contains("criterion")) t.criterion = parse_criterion(p.get_string("criterion", ""));
  const auto depth = p.get_int("max_depth", static_cast<long long>(t.max_depth));
  const auto leaf = p.get_int("min_leaf", static_cast<long long>(t.min_samples_leaf));
  if (depth < 1) throw ConfigError("tree: max_depth must be at least 1");
  if (leaf < 1) throw ConfigError("tree: min_leaf must be at least 1");
  t.max_depth = static_cast<std::size_t>(depth);
  t.min_samples_leaf = static_cast<std::size_t>(leaf);
  t.min_impurity_decrease = p.get_double("min_impurity_decrease", t.min_impurity_decrease);
  t.max_features = static_cast<std::size_t>(p.get_int("max_features", static_cast<long long>(t.max_features)));
  return t;
}

struct SplitNode {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;   // taken when x[feature] < threshold
  std::size_t right = 0;
};

struct LeafNode {
  double positive_fraction = 0.0;  // weighted when fitted with weights
  std::size_t sample_count = 0;
};

using TreeNode = std::variant<SplitNode, LeafNode>;

// Nodes live in a flat vector; index 0 is the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

  std::size_t leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (const auto* split = std::get_if<SplitNode>(&nodes_[i])) i = x[split->feature] < split->threshold ? split->left : split->right;
    return i;
  }

  const LeafNode& leaf(std::span<const double> x) const { return std::get<LeafNode>(nodes_[leaf_index(x)]); }

  double predict_proba(std::span<const double> x) const { return leaf(x).positive_fraction; }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return std::holds_alternative<LeafNode>(n); }));
  }

  std::size_t depth() const { return depth_from(0); }

  // One node per line in pre-order, indented two spaces per level:
  //   split feature=<index> threshold=<value>
  //   leaf fraction=<p> count=<n>
  void export_text(std::ostream& out) const { export_from(out, 0, 0); }

 private:
  std::size_t depth_from(std::size_t i) const {
    if (const auto* s = std::get_if<SplitNode>(&nodes_[i])) return 1 + std::max(depth_from(s->left), depth_from(s->right));
    return 0;
  }

  void export_from(std::ostream& out, std::size_t i, std::size_t level) const {
    out << std::string(2 * level, ' ');
    if (const auto* s = std::get_if<SplitNode>(&nodes_[i])) {
      out << "split feature=" << s->feature << " threshold=" << std::setprecision(17) << s->threshold << '\n';
      export_from(out, s->left, level + 1);
      export_from(out, s->right, level + 1);
    } else {
      const auto& l = std::get<LeafNode>(nodes_[i]);
      out << "leaf fraction=" << std::setprecision(17) << l.positive_fraction << " count=" << l.sample_count << '\n';
    }
  }

  std::vector<TreeNode> nodes_;
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params, std::span<const double> weights, std::uint64_t seed)
      : data_(data), params_(params), weights_(weights), rng_(seed) {
    all_features_.resize(data.n_features());
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
  }

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  double weight(std::size_t r) const { return weights_.empty() ? 1.0 : weights_[r]; }

  std::size_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back(LeafNode{});
    double w[2] = {0.0, 0.0};
    for (const auto r : rows) w[data_.labels[r]] += weight(r);
    const double total = w[0] + w[1];
    const LeafNode leaf{total > 0.0 ? w[1] / total : 0.5, rows.size()};

    if (depth >= params_.max_depth || rows.size() < 2 * params_.min_samples_leaf || w[0] == 0.0 || w[1] == 0.0) {
      nodes_[id] = leaf;
      return id;
    }
    const auto split = best_split(data_.features, data_.labels, rows, weights_, candidates(), params_.criterion, params_.min_samples_leaf);
    if (!split || split->impurity_decrease < params_.min_impurity_decrease) {
      nodes_[id] = leaf;
      return id;
    }
    std::vector<std::size_t> left, right;
    for (const auto r : rows) (data_.features(r, split->feature) < split->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const auto l = grow(std::move(left), depth + 1);
    const auto r = grow(std::move(right), depth + 1);
    nodes_[id] = SplitNode{split->feature, split->threshold, l, r};
    return id;
  }

  std::span<const std::size_t> candidates() {
    const std::size_t d = all_features_.size();
    const std::size_t m = params_.max_features;
    if (m == 0 || m >= d) {
      std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
      return all_features_;
    }
    // Partial Fisher-Yates: the first m slots are a uniform sample.
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(d - i));
      std::swap(all_features_[i], all_features_[j]);
    }
    return std::span<const std::size_t>(all_features_).first(m);
  }

  const Dataset& data_;
  const TreeParams& params_;
  std::span<const double> weights_;
  Rng rng_;
  std::vector<std::size_t> all_features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

// Greedy top-down induction. `seed` drives per-split feature sampling when
// params.max_features is below the feature count.
inline DecisionTree fit_tree(const Dataset& train, const TreeParams& params, std::uint64_t seed = 0,
                             std::span<const double> weights = {}) {
  params.validate();
  if (train.size() == 0) throw TrainingError("fit_tree: empty training set");
  if (!weights.empty() && weights.size() != train.size()) throw Error("fit_tree: weight count differs from row count");
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return DecisionTree(detail::TreeBuilder(train, params, weights, seed).build(std::move(rows)));
}

class TreeLearner final : public Learner {
 public:
  using Learner::fit;
  TreeLearner(std::string name, TreeParams params) : name_(std::move(name)), params_(params) { params_.validate(); }
  std::string name() const override { return name_; }
  bool supports_weights() const override { return true; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t seed) const override {
    return wrap(fit_tree(train, params_, seed, weights));
  }
  const TreeParams& params() const noexcept { return params_; }

 private:
  std::string name_;
  TreeParams params_;
};

// ---------------------------------------------------------------------------
// Random forest: f(x) = (1/B) sum_b f_b(x)

inline std::size_t default_max_features(std::size_t n_features) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features)))));
}

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t max_features = 1;

  double predict_proba(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict_proba(x);
    return s / static_cast<double>(trees.size());
  }
};

// Bootstrap resample of n rows drawn with replacement.
inline std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = static_cast<std::size_t>(rng.below(n));
  return out;
}

// Tree b uses seed derive_seed(seed, b): its bootstrap draw comes from
// derive_seed(tree_seed, "bootstrap") and its feature sampling from tree_seed.
inline ForestModel fit_random_forest(const Dataset& train, std::size_t n_trees, TreeParams params, std::size_t max_features,
                                     std::uint64_t seed, bool bootstrap = true) {
  if (n_trees < 1) throw ConfigError("fit_random_forest: need at least one tree");
  if (max_features < 1 || max_features > train.n_features())
    throw ConfigError("fit_random_forest: max_features must lie in [1, n_features]");
  params.max_features = max_features;
  ForestModel forest;
  forest.max_features = max_features;
  for (std::size_t b = 0; b < n_trees; ++b) {
    const auto tree_seed = derive_seed(seed, static_cast<std::uint64_t>(b));
    forest.tree_seeds.push_back(tree_seed);
    if (bootstrap) {
      const auto rows = bootstrap_indices(train.size(), derive_seed(tree_seed, "bootstrap"));
      forest.trees.push_back(fit_tree(train.subset(rows), params, tree_seed));
    } else {
      forest.trees.push_back(fit_tree(train, params, tree_seed));
    }
  }
  return forest;
}

class RandomForestLearner final : public Learner {
 public:
  using Learner::fit;
  RandomForestLearner(std::size_t n_trees, TreeParams params, std::size_t max_features = 0)
      : n_trees_(n_trees), params_(params), max_features_(max_features) {
    if (n_trees_ < 1) throw ConfigError("random_forest: trees must be at least 1");
    params_.validate();
  }
  std::string name() const override { return "random_forest"; }
  ClassifierPtr fit(const Dataset& train, std::span<const double> weights, std::uint64_t seed) const override {
    reject_weights(weights);
    const auto m = max_features_ == 0 ? default_max_features(train.n_features()) : std::min(max_features_, train.n_features());
    return wrap(fit_random_forest(train, n_trees_, params_, m, seed));
  }

 private:
  std::size_t n_trees_;
  TreeParams params_;
  std::size_t max_features_;
};

}  // namespace stackgen
