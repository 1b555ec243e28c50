#include "calibench/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "calibench/errors.hpp"

namespace calibench {

using nlohmann::json;

Method parse_method(std::string_view name) {
  if (name == "logistic") return Method::Logistic;
  if (name == "isotonic") return Method::Isotonic;
  if (name == "stump") return Method::Stump;
  if (name == "none") return Method::None;
  throw Error(ErrorKind::InvalidSpec, "unknown calibration method '" + std::string(name) + "'");
}

const char* to_string(Method method) {
  switch (method) {
    case Method::Logistic: return "logistic";
    case Method::Isotonic: return "isotonic";
    case Method::Stump: return "stump";
    case Method::None: return "none";
  }
  return "none";
}

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* what) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, std::string(what) + ": " + std::to_string(scores.size()) +
                                               " scores vs " + std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw Error(ErrorKind::EmptyInput, what);
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorKind::MalformedRow, std::string(what) + ": label outside {0,1}");
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double penalized_loss(double b0, double b1, std::span<const double> s, std::span<const int> y, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double z = b0 + b1 * s[i];
    loss += softplus(z) - (y[i] == 1 ? z : 0.0);
  }
  return loss + 0.5 * l2 * (b0 * b0 + b1 * b1);
}

// Intercept-only regularized fit, used when every score is identical.
LogisticCalibrator fit_intercept_only(std::span<const int> y, const LogisticConfig& config) {
  const double n = static_cast<double>(y.size());
  const double k = static_cast<double>(std::accumulate(y.begin(), y.end(), 0));
  double b0 = std::log(k / (n - k));
  for (int it = 0; it < config.max_iter; ++it) {
    const double p = sigmoid(b0);
    const double grad = n * p - k + config.l2 * b0;
    const double hess = n * p * (1.0 - p) + config.l2;
    const double step = grad / hess;
    b0 -= step;
    if (std::abs(step) < config.tol) break;
  }
  return {b0, 0.0};
}

}  // namespace

LogisticCalibrator fit_logistic(std::span<const double> scores, std::span<const int> labels,
                                const LogisticConfig& config) {
  check_inputs(scores, labels, "fit_logistic");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw Error(ErrorKind::SingleClass, "fit_logistic needs both classes");
  }
  if (config.l2 < 0.0) throw Error(ErrorKind::InvalidSpec, "l2 must be non-negative");

  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) return fit_intercept_only(labels, config);

  // Newton runs on centered scores, z = a + b1 * (s - mean). The penalty on
  // (a, b1) is then unchanged by shifting the scores or by mirroring them
  // together with the labels, so symmetric data gets a symmetric boundary.
  const double center = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  std::vector<double> centered(scores.begin(), scores.end());
  for (double& s : centered) s -= center;

  double a = 0.0;
  double b1 = 0.0;
  double loss = penalized_loss(a, b1, centered, labels, config.l2);
  for (int it = 0; it < config.max_iter; ++it) {
    double g0 = config.l2 * a;
    double g1 = config.l2 * b1;
    double h00 = config.l2;
    double h01 = 0.0;
    double h11 = config.l2;
    for (std::size_t i = 0; i < centered.size(); ++i) {
      const double s = centered[i];
      const double p = sigmoid(a + b1 * s);
      const double r = p - labels[i];
      const double w = p * (1.0 - p);
      g0 += r;
      g1 += r * s;
      h00 += w;
      h01 += w * s;
      h11 += w * s * s;
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 1e-300)) break;
    const double d0 = -(h11 * g0 - h01 * g1) / det;
    const double d1 = -(h00 * g1 - h01 * g0) / det;
    const double slope = g0 * d0 + g1 * d1;

    // Backtracking keeps every accepted step a descent step.
    double t = 1.0;
    double next_loss = penalized_loss(a + d0, b1 + d1, centered, labels, config.l2);
    int halvings = 0;
    while (!(next_loss <= loss + 1e-4 * t * slope) && halvings < 60) {
      t *= 0.5;
      next_loss = penalized_loss(a + t * d0, b1 + t * d1, centered, labels, config.l2);
      ++halvings;
    }
    if (!(next_loss <= loss)) break;
    a += t * d0;
    b1 += t * d1;
    loss = next_loss;
    if (std::max(std::abs(t * d0), std::abs(t * d1)) < config.tol) break;
  }
  return {a - b1 * center, b1};
}

double predict_logistic(const LogisticCalibrator& cal, double score) {
  return sigmoid(cal.beta0 + cal.beta1 * score);
}

double logistic_log_loss(const LogisticCalibrator& cal, std::span<const double> scores,
                         std::span<const int> labels) {
  check_inputs(scores, labels, "logistic_log_loss");
  return penalized_loss(cal.beta0, cal.beta1, scores, labels, 0.0) / static_cast<double>(scores.size());
}

std::pair<double, double> logistic_standard_errors(const LogisticCalibrator& cal,
                                                   std::span<const double> scores) {
  double i00 = 0.0;
  double i01 = 0.0;
  double i11 = 0.0;
  for (double s : scores) {
    const double p = predict_logistic(cal, s);
    const double w = p * (1.0 - p);
    i00 += w;
    i01 += w * s;
    i11 += w * s * s;
  }
  const double det = i00 * i11 - i01 * i01;
  return {std::sqrt(i11 / det), std::sqrt(i00 / det)};
}

// ---------------------------------------------------------------------------
// Isotonic

std::vector<double> pava(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) {
    throw Error(ErrorKind::LengthMismatch, "pava: values and weights differ in length");
  }
  struct Block {
    double weighted_sum;
    double weight;
    std::size_t count;
    double mean() const { return weighted_sum / weight; }
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i] * weights[i], weights[i], 1});
    while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().weighted_sum += top.weighted_sum;
      blocks.back().weight += top.weight;
      blocks.back().count += top.count;
    }
  }
  std::vector<double> fitted;
  fitted.reserve(values.size());
  for (const auto& b : blocks) fitted.insert(fitted.end(), b.count, b.mean());
  return fitted;
}

IsotonicCalibrator fit_isotonic(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "fit_isotonic");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Duplicate scores collapse to their mean label with weight = multiplicity.
  IsotonicCalibrator cal;
  std::vector<double> means;
  std::vector<double> weights;
  std::size_t i = 0;
  while (i < order.size()) {
    const double x = scores[order[i]];
    double sum = 0.0;
    double count = 0.0;
    while (i < order.size() && scores[order[i]] == x) {
      sum += labels[order[i]];
      count += 1.0;
      ++i;
    }
    cal.knots_x.push_back(x);
    means.push_back(sum / count);
    weights.push_back(count);
  }
  cal.knots_y = pava(means, weights);
  return cal;
}

double predict_isotonic(const IsotonicCalibrator& cal, double score) {
  const auto& xs = cal.knots_x;
  const auto& ys = cal.knots_y;
  if (xs.empty()) throw Error(ErrorKind::EmptyInput, "isotonic calibrator has no knots");
  if (score <= xs.front()) return ys.front();
  if (score >= xs.back()) return ys.back();
  const auto r = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), score) - xs.begin());
  const std::size_t l = r - 1;
  if (score == xs[l]) return ys[l];
  return ys[l] + (score - xs[l]) / (xs[r] - xs[l]) * (ys[r] - ys[l]);
}

// ---------------------------------------------------------------------------
// Stump

StumpCalibrator fit_stump(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "fit_stump");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  const double lowest = scores[order.front()];
  const double highest = scores[order.back()];

  // Candidates in ascending order; the first, min - 1, predicts everything positive.
  std::int64_t correct = std::count(labels.begin(), labels.end(), 1);
  std::int64_t best_correct = correct;
  double best_threshold = lowest - 1.0;

  std::size_t i = 0;
  while (i < order.size()) {
    const double x = scores[order[i]];
    while (i < order.size() && scores[order[i]] == x) {
      correct += labels[order[i]] == 0 ? 1 : -1;
      ++i;
    }
    double candidate;
    if (i < order.size()) {
      const double next = scores[order[i]];
      candidate = x + (next - x) / 2.0;
      if (!(candidate < next)) candidate = x;
    } else {
      candidate = highest + 1.0;
    }
    if (correct > best_correct) {
      best_correct = correct;
      best_threshold = candidate;
    }
  }
  return {best_threshold};
}

// ---------------------------------------------------------------------------
// Uniform contract

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

double predict(const Calibrator& cal, double score) {
  return std::visit(overloaded{
                        [&](const LogisticCalibrator& c) { return predict_logistic(c, score); },
                        [&](const IsotonicCalibrator& c) { return predict_isotonic(c, score); },
                        [&](const StumpCalibrator& c) { return score > c.threshold ? 1.0 : 0.0; },
                        [](const ConstantCalibrator& c) { return static_cast<double>(c.label); },
                    },
                    cal);
}

int decide(const Calibrator& cal, double score) {
  return std::visit(overloaded{
                        // sigmoid(z) > 0.5 exactly when z > 0; testing z avoids rounding at the boundary.
                        [&](const LogisticCalibrator& c) { return c.beta0 + c.beta1 * score > 0.0 ? 1 : 0; },
                        [&](const IsotonicCalibrator& c) { return predict_isotonic(c, score) > 0.5 ? 1 : 0; },
                        [&](const StumpCalibrator& c) { return score > c.threshold ? 1 : 0; },
                        [](const ConstantCalibrator& c) { return c.label; },
                    },
                    cal);
}

std::vector<int> decide_all(const Calibrator& cal, std::span<const double> scores) {
  std::vector<int> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(decide(cal, s));
  return out;
}

Calibrator fit(Method method, std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "fit");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0) return ConstantCalibrator{0};
  if (positives == static_cast<std::ptrdiff_t>(labels.size())) return ConstantCalibrator{1};
  switch (method) {
    case Method::Logistic: return fit_logistic(scores, labels);
    case Method::Isotonic: return fit_isotonic(scores, labels);
    case Method::Stump: return fit_stump(scores, labels);
    case Method::None: break;
  }
  throw Error(ErrorKind::InvalidSpec, "method 'none' has no calibrator");
}

const char* kind_name(const Calibrator& cal) {
  return std::visit(overloaded{
                        [](const LogisticCalibrator&) { return "logistic"; },
                        [](const IsotonicCalibrator&) { return "isotonic"; },
                        [](const StumpCalibrator&) { return "stump"; },
                        [](const ConstantCalibrator&) { return "constant"; },
                    },
                    cal);
}

json to_json(const Calibrator& cal) {
  json j;
  j["kind"] = kind_name(cal);
  std::visit(overloaded{
                 [&](const LogisticCalibrator& c) {
                   j["beta0"] = c.beta0;
                   j["beta1"] = c.beta1;
                 },
                 [&](const IsotonicCalibrator& c) {
                   j["knots_x"] = c.knots_x;
                   j["knots_y"] = c.knots_y;
                 },
                 [&](const StumpCalibrator& c) { j["threshold"] = c.threshold; },
                 [&](const ConstantCalibrator& c) { j["label"] = c.label; },
             },
             cal);
  return j;
}

Calibrator calibrator_from_json(const json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "logistic") return LogisticCalibrator{j.at("beta0").get<double>(), j.at("beta1").get<double>()};
    if (kind == "stump") return StumpCalibrator{j.at("threshold").get<double>()};
    if (kind == "constant") {
      const int label = j.at("label").get<int>();
      if (label != 0 && label != 1) throw Error(ErrorKind::InvalidSpec, "constant calibrator label must be 0 or 1");
      return ConstantCalibrator{label};
    }
    if (kind == "isotonic") {
      IsotonicCalibrator c{j.at("knots_x").get<std::vector<double>>(), j.at("knots_y").get<std::vector<double>>()};
      if (c.knots_x.empty() || c.knots_x.size() != c.knots_y.size()) {
        throw Error(ErrorKind::InvalidSpec, "isotonic knots must be non-empty and of equal length");
      }
      for (std::size_t i = 1; i < c.knots_x.size(); ++i) {
        if (!(c.knots_x[i] > c.knots_x[i - 1]) || c.knots_y[i] < c.knots_y[i - 1]) {
          throw Error(ErrorKind::InvalidSpec, "isotonic knots are not monotone");
        }
      }
      return c;
    }
    throw Error(ErrorKind::InvalidSpec, "unknown calibrator kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("malformed calibrator JSON: ") + e.what());
  }
}

}  // namespace calibench
