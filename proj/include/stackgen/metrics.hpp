#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "stackgen/error.hpp"

namespace stackgen {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size())
    throw Error("confusion_matrix: " + std::to_string(predicted.size()) + " predictions for " + std::to_string(actual.size()) + " labels");
  if (actual.empty()) throw Error("confusion_matrix: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool p = predicted[i] == 1;
    const bool a = actual[i] == 1;
    if (p && a) ++cm.tp;
    else if (!p && !a) ++cm.tn;
    else if (p) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

// Undefined (nullopt) when the denominator is zero.
using Rate = std::optional<double>;

inline Rate ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// TP / (TP + FN): both sensitivity and TPR.
inline Rate true_positive_rate(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fn); }
inline Rate true_negative_rate(const ConfusionMatrix& cm) { return ratio(cm.tn, cm.tn + cm.fp); }
inline Rate false_positive_rate(const ConfusionMatrix& cm) { return ratio(cm.fp, cm.fp + cm.tn); }

struct MetricsRecord {
  Rate accuracy;
  Rate sensitivity;
  Rate specificity;
  Rate ppv;
  Rate npv;
  Rate tpr;
  Rate fpr;
  Rate auc;
};

inline MetricsRecord metrics_from_confusion(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error("metrics_from_confusion: empty confusion matrix");
  MetricsRecord m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.sensitivity = true_positive_rate(cm);
  m.specificity = true_negative_rate(cm);
  m.ppv = ratio(cm.tp, cm.tp + cm.fp);
  m.npv = ratio(cm.tn, cm.tn + cm.fn);
  m.tpr = true_positive_rate(cm);
  m.fpr = false_positive_rate(cm);
  return m;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// points[i] is the operating point of "predict 1 when score >= thresholds[i]".
// thresholds[0] is +infinity, giving (0,0).
struct RocCurve {
  std::vector<RocPoint> points;
  std::vector<double> thresholds;
};

// One step per distinct score, descending, so tied scores move together.
inline RocCurve roc_curve(std::span<const double> scores, std::span<const int> actual) {
  if (scores.size() != actual.size()) throw Error("roc_curve: scores and labels differ in length");
  std::size_t positives = 0;
  for (const int y : actual) positives += y == 1 ? 1 : 0;
  const std::size_t negatives = actual.size() - positives;
  if (positives == 0 || negatives == 0) throw Error("roc_curve: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (actual[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives), static_cast<double>(tp) / static_cast<double>(positives)});
    curve.thresholds.push_back(s);
  }
  return curve;
}

// Trapezoidal area under the curve.
inline double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

inline double auc(std::span<const double> scores, std::span<const int> actual) { return auc(roc_curve(scores, actual)); }

}  // namespace stackgen
