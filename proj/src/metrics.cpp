#include "calibench/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "calibench/errors.hpp"
#include "text_io.hpp"

namespace calibench {

namespace {

void check_pair(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::LengthMismatch, std::string(what) + ": " + std::to_string(a) + " vs " +
                                               std::to_string(b) + " elements");
  }
  if (a == 0) throw Error(ErrorKind::EmptyInput, what);
}

void check_labels(std::span<const int> labels, const char* what) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorKind::MalformedRow, std::string(what) + ": label outside {0,1}");
  }
}

struct ClassCounts {
  std::int64_t pos = 0;
  std::int64_t neg = 0;
};

ClassCounts count_classes(std::span<const int> labels, const char* what) {
  ClassCounts c;
  for (int y : labels) (y == 1 ? c.pos : c.neg) += 1;
  if (c.pos == 0 || c.neg == 0) throw Error(ErrorKind::SingleClass, what);
  return c;
}

}  // namespace

double ConfusionCounts::tpr() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionCounts::fpr() const {
  return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn);
}

ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels,
                             double threshold) {
  check_pair(scores.size(), labels.size(), "confusion_at");
  check_labels(labels, "confusion_at");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > threshold;
    if (labels[i] == 1) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_pair(scores.size(), labels.size(), "roc_curve");
  check_labels(labels, "roc_curve");
  const auto classes = count_classes(labels, "roc_curve needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const double p = static_cast<double>(classes.pos);
  const double n = static_cast<double>(classes.neg);

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  curve.thresholds.push_back(scores[order.front()]);

  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / p});
    curve.thresholds.push_back(i < order.size() ? scores[order[i]]
                                                : -std::numeric_limits<double>::infinity());
  }
  return curve;
}

std::string roc_to_csv(const RocCurve& curve) {
  std::ostringstream out;
  out << "threshold,fpr,tpr\n";
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    out << detail::format_double(curve.thresholds[k]) << ',' << detail::format_double(curve.points[k].fpr)
        << ',' << detail::format_double(curve.points[k].tpr) << '\n';
  }
  return out.str();
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_pair(scores.size(), labels.size(), "auc");
  check_labels(labels, "auc");
  const auto classes = count_classes(labels, "auc needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the count of correctly ordered pairs, so ties stay integral.
  std::uint64_t twice_correct = 0;
  std::uint64_t neg_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    std::uint64_t pos_here = 0;
    std::uint64_t neg_here = 0;
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? pos_here : neg_here) += 1;
      ++i;
    }
    twice_correct += 2 * pos_here * neg_below + pos_here * neg_here;
    neg_below += neg_here;
  }
  const double pairs = static_cast<double>(classes.pos) * static_cast<double>(classes.neg);
  return static_cast<double>(twice_correct) / (2.0 * pairs);
}

double auc_trapezoid(std::span<const double> scores, std::span<const int> labels) {
  const auto curve = roc_curve(scores, labels);
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  check_pair(predictions.size(), labels.size(), "accuracy");
  std::int64_t agree = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) agree += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(labels.size());
}

double kappa(std::span<const int> predictions, std::span<const int> labels) {
  check_pair(predictions.size(), labels.size(), "kappa");
  check_labels(labels, "kappa");
  check_labels(predictions, "kappa predictions");
  std::int64_t agree = 0;
  std::int64_t pred_pos = 0;
  std::int64_t true_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    agree += predictions[i] == labels[i] ? 1 : 0;
    pred_pos += predictions[i];
    true_pos += labels[i];
  }
  const std::int64_t n = static_cast<std::int64_t>(labels.size());
  // kappa = (n*agree - M) / (n^2 - M) with M = n^2 * p_e, all integral.
  const std::int64_t chance = pred_pos * true_pos + (n - pred_pos) * (n - true_pos);
  const std::int64_t denom = n * n - chance;
  if (denom == 0) return 0.0;
  return static_cast<double>(n * agree - chance) / static_cast<double>(denom);
}

}  // namespace calibench
