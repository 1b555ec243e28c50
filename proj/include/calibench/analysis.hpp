#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "calibench/corpus.hpp"
#include "calibench/protocols.hpp"

namespace calibench {

// Descending ranks, 1 = highest value. Tied values share the smaller rank and
// the following rank is skipped ([0.9, 0.9, 0.1] -> [1, 1, 3]). NaN values are
// left unranked (rank 0).
std::vector<int> rank_models(std::span<const double> values);

struct RankRow {
  std::string label;  // dataset id, or "mean"
  std::vector<double> values;
  std::vector<int> ranks;
};

struct RankReport {
  std::vector<std::string> models;
  std::vector<RankRow> rows;
  RankRow mean;

  int mean_rank_of(const std::string& model) const;
};

// Builds a report from per-dataset value rows (model order) plus a mean row.
RankReport make_rank_report(std::vector<std::string> models,
                            const std::vector<std::pair<std::string, std::vector<double>>>& rows,
                            std::vector<double> mean_values);

// Report over a protocol run's accuracy (or AUC) values, or its kappa values.
RankReport rank_report(const ProtocolRun& run, bool use_kappa = false);
RankReport rank_report(const BestKappaRun& run);

struct RankDelta {
  std::string model;
  int rank_auc = 0;
  int rank_acc = 0;
  // rank_auc - rank_acc; positive means the model moved up under accuracy.
  int delta = 0;
};

// Mean-row deltas, in the model order of auc_report.
std::vector<RankDelta> rank_delta(const RankReport& auc_report, const RankReport& acc_report);

// Per-dataset deltas for the rows both reports share.
std::vector<std::pair<std::string, std::vector<RankDelta>>> rank_delta_by_dataset(const RankReport& auc_report,
                                                                                   const RankReport& acc_report);

// Population variance of the model's scores pooled over every dataset.
double score_variance(const BenchmarkCorpus& corpus, const std::string& model);
double population_variance(std::span<const double> values);

struct ModelGroup {
  std::vector<std::string> models;
  std::vector<double> variances;
  // Mean of the members' score variances; NaN for an empty group.
  double mean_variance = 0.0;
};

struct DeltaGroups {
  ModelGroup better;
  ModelGroup worse;
  ModelGroup unchanged;
};

DeltaGroups group_by_delta(const std::vector<RankDelta>& deltas, const BenchmarkCorpus& corpus);

struct Histogram {
  std::string model;
  // bin_count + 1 strictly increasing edges; bin k is [edges[k], edges[k+1]),
  // the last bin closed on the right.
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

// Equal-width bins over the observed range. When every value is equal the
// result is a single bin holding all of them.
Histogram histogram_of(std::span<const double> values, int bin_count);
Histogram histogram(const BenchmarkCorpus& corpus, const std::string& model, int bin_count = 20);

std::string to_csv(const Histogram& h);
std::string to_csv(const std::vector<RankDelta>& deltas);

}  // namespace calibench
