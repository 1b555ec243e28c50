#pragma once

#include <cstdint>

#include "calibench/corpus.hpp"

namespace calibench {

struct FixtureConfig {
  std::uint64_t seed = 42;
  int items_per_dataset = 200;
};

// Seeded two-domain, four-dataset corpus with two models:
//   "sharp"  - scores pinned near 0.98 (domain "news") or 0.02 (domain "chat"),
//              almost perfectly ordered within each dataset but with a decision
//              boundary that moves between domains;
//   "smooth" - overlapping mid-range scores with one boundary at 0.5 everywhere.
// Throws AssertionFailed unless AUC ranks sharp >= smooth on every dataset while
// XDomain logistic expected accuracy ranks smooth first.
BenchmarkCorpus make_rank_flip_fixture(const FixtureConfig& config = {});

}  // namespace calibench
