#include <doctest.h>

#include <cmath>
#include <random>

#include "calibench/calibrate.hpp"
#include "calibench/errors.hpp"
#include "calibench/metrics.hpp"
#include "oracles.hpp"

using namespace calibench;

namespace {
using V = std::vector<double>;
using L = std::vector<int>;

template <class F>
ErrorKind kind_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::AssertionFailed;
}

// Isotonic fit evaluated at each training point, in ascending score order.
V fitted_in_order(const IsotonicCalibrator& cal, V scores) {
  std::sort(scores.begin(), scores.end());
  V out;
  for (double s : scores) out.push_back(predict_isotonic(cal, s));
  return out;
}
}  // namespace

TEST_CASE("predict_logistic examples") {
  CHECK(predict_logistic({0.0, 0.0}, 0.37) == 0.5);
  CHECK(predict_logistic({0.0, 1.0}, 0.0) == 0.5);
  CHECK(predict_logistic({-3.0, 6.0}, 0.5) == 0.5);
  CHECK(predict_logistic({0.0, 1.0}, 800.0) == 1.0);
  CHECK(predict_logistic({0.0, 1.0}, -800.0) >= 0.0);
}

TEST_CASE("separable two-point logistic fit puts the boundary at 0.5") {
  const auto cal = fit_logistic(V{0.2, 0.8}, L{0, 1});
  CHECK(cal.beta1 > 0.0);
  CHECK(-cal.beta0 / cal.beta1 == doctest::Approx(0.5).epsilon(1e-9));
  const Calibrator c = cal;
  CHECK(decide(c, 0.5 + 1e-6) == 1);
  CHECK(decide(c, 0.5 - 1e-6) == 0);
}

TEST_CASE("logistic decide is strict at the boundary") {
  const Calibrator c = LogisticCalibrator{0.0, 0.0};
  CHECK(predict(c, 0.9) == 0.5);
  CHECK(decide(c, 0.9) == 0);
  const Calibrator d = LogisticCalibrator{-3.0, 6.0};
  CHECK(decide(d, 0.5) == 0);
  CHECK(decide(d, std::nextafter(0.5, 1.0)) == 1);
}

TEST_CASE("logistic fit on constant scores predicts the majority class") {
  const auto cal = fit_logistic(V{0.4, 0.4, 0.4, 0.4}, L{1, 1, 1, 0});
  CHECK(cal.beta1 == 0.0);
  CHECK(cal.beta0 == doctest::Approx(std::log(3.0)).epsilon(1e-4));
  CHECK(decide(Calibrator{cal}, 0.4) == 1);
}

TEST_CASE("logistic input errors") {
  CHECK(kind_of([] { fit_logistic(V{0.1, 0.2}, L{1, 1}); }) == ErrorKind::SingleClass);
  CHECK(kind_of([] { fit_logistic(V{0.1}, L{1, 0}); }) == ErrorKind::LengthMismatch);
  CHECK(kind_of([] { fit_logistic(V{}, L{}); }) == ErrorKind::EmptyInput);
}

TEST_CASE("logistic recovers generator parameters and beats the grid oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  V s;
  L y;
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    s.push_back(x);
    y.push_back(u(rng) < 1.0 / (1.0 + std::exp(-(-3.0 + 6.0 * x))) ? 1 : 0);
  }
  const auto cal = fit_logistic(s, y);
  const auto [se0, se1] = logistic_standard_errors(cal, s);
  CHECK(std::abs(cal.beta0 - -3.0) <= 3.0 * se0);
  CHECK(std::abs(cal.beta1 - 6.0) <= 3.0 * se1);
  CHECK(logistic_log_loss(cal, s, y) <= oracle::grid_search_log_loss(s, y) + 1e-3);
}

TEST_CASE("property: logistic loss never exceeds the grid oracle and fits are deterministic") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 40; ++k) {
    const auto inst = oracle::random_instance(rng, 4 + rng() % 60, 0.2);
    const auto cal = fit_logistic(inst.scores, inst.labels);
    CHECK(logistic_log_loss(cal, inst.scores, inst.labels) <=
          oracle::grid_search_log_loss(inst.scores, inst.labels) + 1e-3);
    const auto again = fit_logistic(inst.scores, inst.labels);
    CHECK(again.beta0 == cal.beta0);
    CHECK(again.beta1 == cal.beta1);
    // The decision flips exactly at -beta0 / beta1.
    if (cal.beta1 > 0.0) {
      const double b = -cal.beta0 / cal.beta1;
      const Calibrator c = cal;
      CHECK(decide(c, b + 1e-9 * (1 + std::abs(b))) == 1);
      CHECK(decide(c, b - 1e-9 * (1 + std::abs(b))) == 0);
    }
  }
}

TEST_CASE("isotonic examples") {
  SUBCASE("monotone input is its own fit") {
    const auto cal = fit_isotonic(V{1, 2, 3}, L{0, 0, 1});
    CHECK(cal.knots_x == V{1, 2, 3});
    CHECK(cal.knots_y == V{0, 0, 1});
  }
  SUBCASE("one violation pools the first two points") {
    const auto cal = fit_isotonic(V{1, 2, 3}, L{1, 0, 1});
    CHECK(cal.knots_y == V{0.5, 0.5, 1.0});
    CHECK(oracle::isotonic_by_enumeration({1, 2, 3}, {1, 0, 1}) == V{0.5, 0.5, 1.0});
  }
  SUBCASE("interpolation and clamping") {
    const IsotonicCalibrator cal{{2, 3}, {0.5, 1.0}};
    CHECK(predict_isotonic(cal, 2.5) == 0.75);
    CHECK(predict_isotonic(cal, 0.0) == 0.5);
    CHECK(predict_isotonic(cal, 10.0) == 1.0);
    CHECK(decide(Calibrator{cal}, 2.5) == 1);
    // 0.5 is not above 0.5.
    CHECK(decide(Calibrator{cal}, 2.0) == 0);
  }
  SUBCASE("duplicate scores are pooled to a single knot") {
    const auto cal = fit_isotonic(V{0.3, 0.3, 0.3, 0.9}, L{1, 0, 0, 1});
    CHECK(cal.knots_x == V{0.3, 0.9});
    CHECK(cal.knots_y[0] == doctest::Approx(1.0 / 3.0));
    CHECK(cal.knots_y[1] == 1.0);
  }
}

TEST_CASE("property: isotonic fit matches the exhaustive oracle for small n") {
  std::mt19937_64 rng(22);
  int cases = 0;
  for (int k = 0; k < 600; ++k) {
    const auto inst = oracle::random_instance(rng, 1 + rng() % 8, 0.3, 0.1);
    const auto cal = fit_isotonic(inst.scores, inst.labels);
    const auto got = fitted_in_order(cal, inst.scores);
    const auto expected = oracle::isotonic_by_enumeration(inst.scores, inst.labels);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - expected[i]) <= 1e-9);
    ++cases;
  }
  CHECK(cases >= 500);
}

TEST_CASE("property: isotonic fits are monotone, bounded, and idempotent") {
  std::mt19937_64 rng(23);
  for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
    const auto inst = oracle::random_instance(rng, n, 0.2);
    const auto cal = fit_isotonic(inst.scores, inst.labels);
    for (std::size_t i = 1; i < cal.knots_y.size(); ++i) {
      CHECK(cal.knots_x[i] > cal.knots_x[i - 1]);
      CHECK(cal.knots_y[i] >= cal.knots_y[i - 1]);
    }
    for (double v : cal.knots_y) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    // Refitting on the fitted values leaves them unchanged.
    V w(cal.knots_y.size(), 1.0);
    const auto refit = pava(cal.knots_y, w);
    CHECK(refit == cal.knots_y);
  }
}

TEST_CASE("pava on weighted values") {
  CHECK(pava(V{3, 1}, V{1, 3}) == V{1.5, 1.5});
  CHECK(pava(V{}, V{}).empty());
  CHECK(kind_of([] { pava(V{1}, V{}); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("stump examples") {
  SUBCASE("separable") {
    const V s{0.1, 0.2, 0.8, 0.9};
    const L y{0, 0, 1, 1};
    const auto st = fit_stump(s, y);
    CHECK(st.threshold == doctest::Approx(0.5));
    CHECK(accuracy(decide_all(Calibrator{st}, s), y) == 1.0);
  }
  SUBCASE("all positive picks min - 1") {
    const auto st = fit_stump(V{0.3, 0.7}, L{1, 1});
    CHECK(st.threshold == doctest::Approx(-0.7));
  }
  SUBCASE("anti-correlated data keeps the smallest best candidate") {
    const V s{0.1, 0.9};
    const L y{1, 0};
    const auto st = fit_stump(s, y);
    CHECK(st.threshold == doctest::Approx(-0.9));
    CHECK(accuracy(decide_all(Calibrator{st}, s), y) == 0.5);
  }
  SUBCASE("decision") {
    CHECK(decide(Calibrator{StumpCalibrator{0.5}}, 0.6) == 1);
    CHECK(decide(Calibrator{StumpCalibrator{0.5}}, 0.5) == 0);
    CHECK(predict(Calibrator{StumpCalibrator{0.5}}, 0.6) == 1.0);
  }
}

TEST_CASE("property: stump training accuracy equals the exhaustive scan") {
  std::mt19937_64 rng(24);
  for (int k = 0; k < 500; ++k) {
    const auto inst = oracle::random_instance(rng, 1 + rng() % 100, 0.25, 0.05);
    const auto st = fit_stump(inst.scores, inst.labels);
    const double got = accuracy(decide_all(Calibrator{st}, inst.scores), inst.labels);
    CHECK(std::abs(got - oracle::best_stump_accuracy(inst.scores, inst.labels)) <= 1e-12);
  }
}

TEST_CASE("fit dispatch") {
  CHECK(std::holds_alternative<ConstantCalibrator>(fit(Method::Logistic, V{0.1, 0.2}, L{1, 1})));
  CHECK(std::get<ConstantCalibrator>(fit(Method::Isotonic, V{0.1, 0.2}, L{0, 0})).label == 0);
  CHECK(std::holds_alternative<LogisticCalibrator>(fit(Method::Logistic, V{0.1, 0.2}, L{0, 1})));
  CHECK(std::holds_alternative<IsotonicCalibrator>(fit(Method::Isotonic, V{0.1, 0.2}, L{0, 1})));
  CHECK(std::holds_alternative<StumpCalibrator>(fit(Method::Stump, V{0.1, 0.2}, L{0, 1})));
  CHECK(kind_of([] { fit(Method::None, V{0.1, 0.2}, L{0, 1}); }) == ErrorKind::InvalidSpec);
  CHECK(parse_method("isotonic") == Method::Isotonic);
  CHECK(kind_of([] { parse_method("forest"); }) == ErrorKind::InvalidSpec);
}

TEST_CASE("property: decide is monotone in score for every method") {
  std::mt19937_64 rng(25);
  for (int k = 0; k < 100; ++k) {
    const auto inst = oracle::random_instance(rng, 2 + rng() % 50, 0.2);
    for (auto m : {Method::Isotonic, Method::Stump, Method::Logistic}) {
      const auto cal = fit(m, inst.scores, inst.labels);
      if (const auto* lc = std::get_if<LogisticCalibrator>(&cal); lc && lc->beta1 < 0.0) continue;
      int prev = 0;
      for (double s = -0.5; s <= 1.8; s += 0.01) {
        const int d = decide(cal, s);
        CHECK(d >= prev);
        prev = d;
      }
    }
  }
}

TEST_CASE("calibrators round-trip through JSON") {
  const std::vector<Calibrator> cals{LogisticCalibrator{-3.25, 6.125}, IsotonicCalibrator{{0.1, 0.4}, {0.2, 0.9}},
                                     StumpCalibrator{0.375}, ConstantCalibrator{1}};
  for (const auto& c : cals) {
    const auto j = to_json(c);
    CHECK(j["kind"] == kind_name(c));
    const auto back = calibrator_from_json(j);
    CHECK(back.index() == c.index());
    for (double s : {-1.0, 0.1, 0.25, 0.4, 0.9, 2.0}) {
      CHECK(predict(back, s) == predict(c, s));
      CHECK(decide(back, s) == decide(c, s));
    }
  }
  CHECK(kind_of([] { calibrator_from_json(nlohmann::json{{"kind", "forest"}}); }) == ErrorKind::InvalidSpec);
  CHECK(kind_of([] {
          calibrator_from_json(nlohmann::json{{"kind", "isotonic"}, {"knots_x", {0.1, 0.2}}, {"knots_y", {0.9, 0.1}}});
        }) == ErrorKind::InvalidSpec);
  CHECK(kind_of([] { calibrator_from_json(nlohmann::json{{"kind", "logistic"}}); }) == ErrorKind::InvalidSpec);
}
