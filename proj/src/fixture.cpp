#include "calibench/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "calibench/errors.hpp"
#include "calibench/metrics.hpp"
#include "calibench/protocols.hpp"

namespace calibench {

namespace {

// Distribution code is written out here so a seed produces the same corpus
// on every standard library.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

struct DatasetSpec {
  const char* id;
  const char* domain;
};

constexpr DatasetSpec kDatasets[] = {
    {"news-1", "news"}, {"news-2", "news"}, {"chat-1", "chat"}, {"chat-2", "chat"}};

// Cluster centres of the sharp model: news sits near the top of the scale,
// chat near the bottom, and in both the classes are a narrow gap apart.
constexpr double kSharpNewsPos = 0.985;
constexpr double kSharpNewsNeg = 0.955;
constexpr double kSharpChatPos = 0.045;
constexpr double kSharpChatNeg = 0.015;
constexpr double kSharpSpread = 0.004;
constexpr double kSharpConfusion = 0.05;

constexpr double kSmoothPos = 0.6;
constexpr double kSmoothNeg = 0.4;
constexpr double kSmoothSpread = 0.15;

double clamp01(double x, double margin) { return std::clamp(x, margin, 1.0 - margin); }

}  // namespace

BenchmarkCorpus make_rank_flip_fixture(const FixtureConfig& config) {
  if (config.items_per_dataset < 4) {
    throw Error(ErrorKind::InvalidSpec, "fixture needs at least 4 items per dataset");
  }
  Draws draws(config.seed);
  DomainRegistry registry;
  std::vector<ScoredRecord> records;
  std::vector<ScoredRecord> smooth_records;

  for (const auto& ds : kDatasets) {
    registry.add(ds.id, ds.domain);
    const bool news = std::string(ds.domain) == "news";
    for (int i = 0; i < config.items_per_dataset; ++i) {
      char item[16];
      std::snprintf(item, sizeof(item), "i%04d", i);
      const int label = draws.uniform() < 0.5 ? 1 : 0;

      // A small share of sharp's items land in the other class's cluster.
      const bool confused = draws.uniform() < kSharpConfusion;
      const int cluster = confused ? 1 - label : label;
      const double centre = news ? (cluster == 1 ? kSharpNewsPos : kSharpNewsNeg)
                                 : (cluster == 1 ? kSharpChatPos : kSharpChatNeg);
      const double sharp = clamp01(centre + kSharpSpread * draws.normal(), 1e-3);
      const double smooth =
          clamp01((label == 1 ? kSmoothPos : kSmoothNeg) + kSmoothSpread * draws.normal(), 0.0);

      records.push_back({"sharp", ds.id, item, sharp, label});
      smooth_records.push_back({"smooth", ds.id, item, smooth, label});
    }
  }
  records.insert(records.end(), smooth_records.begin(), smooth_records.end());
  auto corpus = BenchmarkCorpus::build(std::move(records), std::move(registry));

  for (const auto& d : corpus.datasets()) {
    const auto sharp = slice(corpus, "sharp", {d});
    const auto smooth = slice(corpus, "smooth", {d});
    const double auc_sharp = auc(sharp.scores, sharp.labels);
    const double auc_smooth = auc(smooth.scores, smooth.labels);
    if (!(auc_sharp >= auc_smooth)) {
      throw Error(ErrorKind::AssertionFailed, "seed " + std::to_string(config.seed) + ": AUC of sharp (" +
                                                  std::to_string(auc_sharp) + ") below smooth (" +
                                                  std::to_string(auc_smooth) + ") on '" + d + "'");
    }
  }
  const auto run = run_protocol(corpus, {Regime::XDomain, Method::Logistic, 0.8, 1, config.seed}, {1});
  const double acc_sharp = run.mean_of("sharp").accuracy;
  const double acc_smooth = run.mean_of("smooth").accuracy;
  if (!(acc_smooth > acc_sharp)) {
    throw Error(ErrorKind::AssertionFailed, "seed " + std::to_string(config.seed) +
                                                ": xdomain accuracy does not rank smooth first (smooth " +
                                                std::to_string(acc_smooth) + ", sharp " +
                                                std::to_string(acc_sharp) + ")");
  }
  return corpus;
}

}  // namespace calibench
