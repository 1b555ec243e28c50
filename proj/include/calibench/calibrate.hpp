#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace calibench {

enum class Method { Logistic, Isotonic, Stump, None };

Method parse_method(std::string_view name);
const char* to_string(Method method);

// Platt scaling: p(s) = 1 / (1 + exp(-(beta0 + beta1 * s))).
struct LogisticCalibrator {
  double beta0 = 0.0;
  double beta1 = 0.0;
};

// Pooled isotonic fit, one knot per distinct training score.
struct IsotonicCalibrator {
  std::vector<double> knots_x;
  std::vector<double> knots_y;
};

// Depth-1 tree: score > threshold predicts positive.
struct StumpCalibrator {
  double threshold = 0.0;
};

// Majority-class predictor used when the training slice holds a single class.
struct ConstantCalibrator {
  int label = 0;
};

using Calibrator = std::variant<LogisticCalibrator, IsotonicCalibrator, StumpCalibrator, ConstantCalibrator>;

struct LogisticConfig {
  double l2 = 1e-6;
  int max_iter = 100;
  double tol = 1e-10;
};

// Minimizes sum of log-losses + (l2 / 2) * (a^2 + beta1^2) by damped Newton
// iterations (IRLS), where a is the intercept at the mean score
// (a = beta0 + beta1 * mean). Never throws on non-convergence.
LogisticCalibrator fit_logistic(std::span<const double> scores, std::span<const int> labels,
                                const LogisticConfig& config = {});

double predict_logistic(const LogisticCalibrator& cal, double score);

// Mean (unregularized) log-loss of the calibrator on the data.
double logistic_log_loss(const LogisticCalibrator& cal, std::span<const double> scores,
                         std::span<const int> labels);

// Asymptotic standard errors of (beta0, beta1) from the inverse Fisher information.
std::pair<double, double> logistic_standard_errors(const LogisticCalibrator& cal,
                                                   std::span<const double> scores);

IsotonicCalibrator fit_isotonic(std::span<const double> scores, std::span<const int> labels);

// Weighted pool-adjacent-violators on an already ordered sequence: returns the
// non-decreasing sequence minimizing sum w_i (y_i - yhat_i)^2.
std::vector<double> pava(std::span<const double> values, std::span<const double> weights);

// Linear interpolation between bracketing knots, clamped outside the range.
double predict_isotonic(const IsotonicCalibrator& cal, double score);

StumpCalibrator fit_stump(std::span<const double> scores, std::span<const int> labels);

// Probability estimate for probabilistic calibrators; stump and constant
// calibrators return their hard decision as 0 or 1.
double predict(const Calibrator& cal, double score);

// Logistic/isotonic: probability > 0.5. Stump: score > threshold. Boundary decides 0.
int decide(const Calibrator& cal, double score);
std::vector<int> decide_all(const Calibrator& cal, std::span<const double> scores);

// Fits the given method. Single-class labels yield a ConstantCalibrator.
Calibrator fit(Method method, std::span<const double> scores, std::span<const int> labels);

const char* kind_name(const Calibrator& cal);

nlohmann::json to_json(const Calibrator& cal);
Calibrator calibrator_from_json(const nlohmann::json& j);

}  // namespace calibench
