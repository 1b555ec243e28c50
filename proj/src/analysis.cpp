#include "calibench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "calibench/errors.hpp"
#include "text_io.hpp"

namespace calibench {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<int> rank_models(std::span<const double> values) {
  std::vector<int> ranks(values.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    int higher = 0;
    for (double v : values) {
      if (!std::isnan(v) && v > values[i]) ++higher;
    }
    ranks[i] = higher + 1;
  }
  return ranks;
}

int RankReport::mean_rank_of(const std::string& model) const {
  const auto it = std::find(models.begin(), models.end(), model);
  if (it == models.end()) throw Error(ErrorKind::UnknownModel, "model '" + model + "'");
  return mean.ranks[static_cast<std::size_t>(it - models.begin())];
}

RankReport make_rank_report(std::vector<std::string> models,
                            const std::vector<std::pair<std::string, std::vector<double>>>& rows,
                            std::vector<double> mean_values) {
  RankReport report;
  report.models = std::move(models);
  const auto width = report.models.size();
  if (mean_values.size() != width) throw Error(ErrorKind::LengthMismatch, "mean row width differs from model count");
  for (const auto& [label, values] : rows) {
    if (values.size() != width) {
      throw Error(ErrorKind::LengthMismatch, "row '" + label + "' width differs from model count");
    }
    report.rows.push_back({label, values, rank_models(values)});
  }
  report.mean = {"mean", mean_values, rank_models(mean_values)};
  return report;
}

RankReport rank_report(const ProtocolRun& run, bool use_kappa) {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (const auto& d : run.datasets) {
    std::vector<double> values;
    for (const auto& m : run.models) {
      const auto* c = run.find(m, d);
      values.push_back(c ? (use_kappa ? c->kappa : c->accuracy) : kNaN);
    }
    rows.emplace_back(d, std::move(values));
  }
  std::vector<double> means;
  for (const auto& m : run.means) means.push_back(use_kappa ? m.kappa : m.accuracy);
  return make_rank_report(run.models, rows, std::move(means));
}

RankReport rank_report(const BestKappaRun& run) {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (const auto& d : run.datasets) {
    std::vector<double> values;
    for (const auto& m : run.models) {
      double v = kNaN;
      for (const auto& c : run.cells) {
        if (c.model_id == m && c.dataset_id == d) v = c.kappa;
      }
      values.push_back(v);
    }
    rows.emplace_back(d, std::move(values));
  }
  std::vector<double> means;
  for (const auto& m : run.means) means.push_back(m.kappa);
  return make_rank_report(run.models, rows, std::move(means));
}

namespace {

std::vector<RankDelta> deltas_for(const std::vector<std::string>& models, const std::vector<int>& auc_ranks,
                                  const std::vector<std::string>& acc_models, const std::vector<int>& acc_ranks) {
  std::vector<RankDelta> out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto it = std::find(acc_models.begin(), acc_models.end(), models[i]);
    const int acc = acc_ranks[static_cast<std::size_t>(it - acc_models.begin())];
    out.push_back({models[i], auc_ranks[i], acc, auc_ranks[i] - acc});
  }
  return out;
}

void check_same_models(const RankReport& a, const RankReport& b) {
  auto x = a.models;
  auto y = b.models;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  if (x != y) throw Error(ErrorKind::UnknownModel, "rank reports cover different model sets");
}

}  // namespace

std::vector<RankDelta> rank_delta(const RankReport& auc_report, const RankReport& acc_report) {
  check_same_models(auc_report, acc_report);
  return deltas_for(auc_report.models, auc_report.mean.ranks, acc_report.models, acc_report.mean.ranks);
}

std::vector<std::pair<std::string, std::vector<RankDelta>>> rank_delta_by_dataset(const RankReport& auc_report,
                                                                                   const RankReport& acc_report) {
  check_same_models(auc_report, acc_report);
  std::vector<std::pair<std::string, std::vector<RankDelta>>> out;
  for (const auto& row : auc_report.rows) {
    for (const auto& other : acc_report.rows) {
      if (other.label != row.label) continue;
      out.emplace_back(row.label, deltas_for(auc_report.models, row.ranks, acc_report.models, other.ranks));
    }
  }
  return out;
}

double population_variance(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "variance of an empty sample");
  // Welford's update.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : values) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  return m2 / static_cast<double>(n);
}

double score_variance(const BenchmarkCorpus& corpus, const std::string& model) {
  return population_variance(slice(corpus, model, corpus.datasets()).scores);
}

DeltaGroups group_by_delta(const std::vector<RankDelta>& deltas, const BenchmarkCorpus& corpus) {
  DeltaGroups groups;
  for (const auto& d : deltas) {
    ModelGroup& g = d.delta > 0 ? groups.better : (d.delta < 0 ? groups.worse : groups.unchanged);
    g.models.push_back(d.model);
    g.variances.push_back(score_variance(corpus, d.model));
  }
  for (ModelGroup* g : {&groups.better, &groups.worse, &groups.unchanged}) {
    g->mean_variance = g->variances.empty()
                           ? kNaN
                           : std::accumulate(g->variances.begin(), g->variances.end(), 0.0) /
                                 static_cast<double>(g->variances.size());
  }
  return groups;
}

Histogram histogram_of(std::span<const double> values, int bin_count) {
  if (bin_count < 1) throw Error(ErrorKind::InvalidSpec, "bin count must be at least 1");
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "histogram of an empty sample");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram h;
  if (lo == hi) {
    h.edges = {lo - 0.5, lo + 0.5};
    h.counts = {values.size()};
    return h;
  }
  const auto bins = static_cast<std::size_t>(bin_count);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) h.edges.push_back(lo + width * static_cast<double>(k));
  h.edges.push_back(hi);
  h.counts.assign(bins, 0);
  for (double x : values) {
    auto k = static_cast<std::size_t>((x - lo) / width);
    k = std::min(k, bins - 1);
    // Guard against rounding placing x on the wrong side of an edge.
    while (k > 0 && x < h.edges[k]) --k;
    while (k + 1 < bins && x >= h.edges[k + 1]) ++k;
    ++h.counts[k];
  }
  return h;
}

Histogram histogram(const BenchmarkCorpus& corpus, const std::string& model, int bin_count) {
  auto h = histogram_of(slice(corpus, model, corpus.datasets()).scores, bin_count);
  h.model = model;
  return h;
}

std::string to_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_left,bin_right,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    out << detail::format_double(h.edges[k]) << ',' << detail::format_double(h.edges[k + 1]) << ','
        << h.counts[k] << '\n';
  }
  return out.str();
}

std::string to_csv(const std::vector<RankDelta>& deltas) {
  std::ostringstream out;
  out << "model,rank_auc,rank_acc,delta\n";
  for (const auto& d : deltas) {
    out << detail::csv_escape(d.model) << ',' << d.rank_auc << ',' << d.rank_acc << ',' << d.delta << '\n';
  }
  return out.str();
}

}  // namespace calibench
