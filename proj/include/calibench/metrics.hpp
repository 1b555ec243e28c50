#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace calibench {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t n() const { return tp + fp + tn + fn; }
  double tpr() const;
  double fpr() const;

  bool operator==(const ConfusionCounts&) const = default;
};

// Positive prediction iff score > threshold.
ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels,
                             double threshold);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// points[k] is the operating point of confusion_at(scores, labels, thresholds[k]).
// thresholds run from the largest score (nothing predicted positive) down
// through every distinct score to -inf (everything positive).
struct RocCurve {
  std::vector<RocPoint> points;
  std::vector<double> thresholds;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

// threshold,fpr,tpr rows with a header.
std::string roc_to_csv(const RocCurve& curve);

// Mann-Whitney form: fraction of (positive, negative) pairs ordered correctly,
// tied pairs counting one half. This is the canonical AUC.
double auc(std::span<const double> scores, std::span<const int> labels);

// Trapezoidal area under roc_curve. Agrees with auc() to rounding error.
double auc_trapezoid(std::span<const double> scores, std::span<const int> labels);

double accuracy(std::span<const int> predictions, std::span<const int> labels);

// Cohen's kappa. Returns 0 when chance agreement is 1.
double kappa(std::span<const int> predictions, std::span<const int> labels);

}  // namespace calibench
