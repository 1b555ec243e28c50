#pragma once

// Brute-force reference implementations used only by tests. None of these
// call into the library code paths they are checked against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

// Fraction of (positive, negative) pairs with the positive scored higher,
// ties counting one half. O(n^2).
inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) good += 1.0;
      else if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

struct Counts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Counts count_at(const std::vector<double>& s, const std::vector<int>& y, double theta) {
  Counts c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > theta && y[i] == 1) ++c.tp;
    if (s[i] > theta && y[i] == 0) ++c.fp;
    if (s[i] <= theta && y[i] == 0) ++c.tn;
    if (s[i] <= theta && y[i] == 1) ++c.fn;
  }
  return c;
}

// Distinct (fpr, tpr) operating points over thresholds +inf, every midpoint
// between adjacent distinct scores, and -inf; in sweep order.
inline std::vector<std::pair<double, double>> roc_by_sweep(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double> distinct(s.begin(), s.end());
  std::vector<double> sorted(distinct.rbegin(), distinct.rend());
  std::vector<double> thresholds{std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) thresholds.push_back((sorted[k] + sorted[k + 1]) / 2.0);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  std::vector<std::pair<double, double>> pts;
  for (double t : thresholds) {
    const auto c = count_at(s, y, t);
    pts.emplace_back(double(c.fp) / double(c.fp + c.tn), double(c.tp) / double(c.tp + c.fn));
  }
  return pts;
}

// Exhaustive isotonic least squares: every way of cutting the score-sorted
// sequence into contiguous blocks (cuts only between distinct scores), block
// values = block means, keep monotone candidates, return the best fit per point
// in sorted order.
inline std::vector<double> isotonic_by_enumeration(std::vector<double> x, std::vector<int> y) {
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> xs, ys;
  for (auto i : order) {
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  const std::size_t n = xs.size();
  std::vector<std::size_t> cut_positions;
  for (std::size_t k = 1; k < n; ++k) {
    if (xs[k] != xs[k - 1]) cut_positions.push_back(k);
  }
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  const std::uint64_t patterns = std::uint64_t{1} << cut_positions.size();
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    std::vector<std::size_t> bounds{0};
    for (std::size_t c = 0; c < cut_positions.size(); ++c) {
      if (mask & (std::uint64_t{1} << c)) bounds.push_back(cut_positions[c]);
    }
    bounds.push_back(n);
    std::vector<double> fit(n);
    double prev = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      double sum = 0.0;
      for (std::size_t k = bounds[b]; k < bounds[b + 1]; ++k) sum += ys[k];
      const double mean = sum / double(bounds[b + 1] - bounds[b]);
      if (mean < prev - 1e-15) monotone = false;
      prev = mean;
      for (std::size_t k = bounds[b]; k < bounds[b + 1]; ++k) fit[k] = mean;
    }
    if (!monotone) continue;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) sse += (ys[k] - fit[k]) * (ys[k] - fit[k]);
    if (sse < best_sse - 1e-15) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

// Best training accuracy over every candidate threshold (midpoints of distinct
// sorted scores plus min-1 and max+1) under "score > theta is positive".
inline double best_stump_accuracy(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double> distinct(s.begin(), s.end());
  std::vector<double> sorted(distinct.begin(), distinct.end());
  std::vector<double> candidates{sorted.front() - 1.0, sorted.back() + 1.0};
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) candidates.push_back((sorted[k] + sorted[k + 1]) / 2.0);
  double best = 0.0;
  for (double t : candidates) {
    const auto c = count_at(s, y, t);
    best = std::max(best, double(c.tp + c.tn) / double(s.size()));
  }
  return best;
}

inline double mean_log_loss(double b0, double b1, const std::vector<double>& s, const std::vector<int>& y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * s[i])));
    const double q = y[i] == 1 ? p : 1.0 - p;
    loss -= std::log(std::max(q, 1e-300));
  }
  return loss / double(s.size());
}

// Minimum mean log-loss over a 41 x 41 grid of (beta0, beta1) in [-20, 20]^2.
inline double grid_search_log_loss(const std::vector<double>& s, const std::vector<int>& y) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      best = std::min(best, mean_log_loss(-20.0 + i, -20.0 + j, s, y));
    }
  }
  return best;
}

inline double two_pass_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / double(v.size());
}

// Seeded random binary-classification instance with both classes present and
// a controllable share of tied scores.
struct Instance {
  std::vector<double> scores;
  std::vector<int> labels;
};

inline Instance random_instance(std::mt19937_64& rng, std::size_t n, double tie_rate, double resolution = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance inst;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = u(rng) < 0.5 ? 1 : 0;
    double s = u(rng) + 0.3 * y;
    if (resolution > 0.0) s = std::round(s / resolution) * resolution;
    if (!inst.scores.empty() && u(rng) < tie_rate) {
      s = inst.scores[static_cast<std::size_t>(u(rng) * double(inst.scores.size())) % inst.scores.size()];
    }
    inst.scores.push_back(s);
    inst.labels.push_back(y);
  }
  if (n >= 2) {
    inst.labels[0] = 1;
    inst.labels[1] = 0;
  }
  return inst;
}

}  // namespace oracle
