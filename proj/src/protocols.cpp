#include "calibench/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "calibench/analysis.hpp"
#include "calibench/errors.hpp"
#include "calibench/metrics.hpp"
#include "text_io.hpp"

namespace calibench {

using nlohmann::json;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Regime parse_regime(std::string_view name) {
  if (name == "xdomain") return Regime::XDomain;
  if (name == "outdomain") return Regime::OutDomain;
  if (name == "indomain") return Regime::InDomain;
  if (name == "indata") return Regime::InData;
  if (name == "outdata") return Regime::OutData;
  if (name == "auconly" || name == "auc") return Regime::AucOnly;
  throw Error(ErrorKind::InvalidSpec, "unknown regime '" + std::string(name) + "'");
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::XDomain: return "xdomain";
    case Regime::OutDomain: return "outdomain";
    case Regime::InDomain: return "indomain";
    case Regime::InData: return "indata";
    case Regime::OutData: return "outdata";
    case Regime::AucOnly: return "auconly";
  }
  return "auconly";
}

const std::vector<Regime>& calibration_regimes() {
  static const std::vector<Regime> all{Regime::XDomain, Regime::OutDomain, Regime::OutData, Regime::InDomain,
                                       Regime::InData};
  return all;
}

const std::vector<Method>& calibration_methods() {
  static const std::vector<Method> all{Method::Logistic, Method::Isotonic, Method::Stump};
  return all;
}

void ProtocolSpec::validate() const {
  if ((method == Method::None) != (regime == Regime::AucOnly)) {
    throw Error(ErrorKind::InvalidSpec, std::string("method '") + to_string(method) +
                                            "' is incompatible with regime '" + to_string(regime) + "'");
  }
  if (!(indata_ratio > 0.0 && indata_ratio < 1.0)) {
    throw Error(ErrorKind::InvalidSpec, "indata ratio must lie strictly between 0 and 1");
  }
  if (indata_reps < 1) throw Error(ErrorKind::InvalidSpec, "indata repetitions must be at least 1");
}

TrainingPlan training_sets(Regime regime, const BenchmarkCorpus& corpus, const std::string& test_dataset) {
  if (!corpus.has_dataset(test_dataset)) {
    throw Error(ErrorKind::UnknownDataset, "dataset '" + test_dataset + "'");
  }
  const auto& domain = corpus.domain_of(test_dataset);
  TrainingPlan plan;
  plan.eval_datasets = {test_dataset};

  auto others = [&](auto keep) {
    std::vector<std::string> out;
    for (const auto& d : corpus.datasets()) {
      if (d != test_dataset && keep(d)) out.push_back(d);
    }
    return out;
  };

  switch (regime) {
    case Regime::XDomain:
      plan.train_datasets = others([](const std::string&) { return true; });
      break;
    case Regime::OutDomain:
      plan.train_datasets = others([&](const std::string& d) { return corpus.domain_of(d) != domain; });
      break;
    case Regime::InDomain:
      plan.train_datasets = others([&](const std::string& d) { return corpus.domain_of(d) == domain; });
      if (plan.train_datasets.empty()) {
        plan.train_datasets = {test_dataset};
        plan.within_dataset_split = true;
        plan.indata_fallback = true;
      }
      break;
    case Regime::InData:
      plan.train_datasets = {test_dataset};
      plan.within_dataset_split = true;
      break;
    case Regime::OutData:
      plan.train_datasets = {test_dataset};
      plan.eval_datasets = others([](const std::string&) { return true; });
      if (plan.eval_datasets.empty()) {
        throw Error(ErrorKind::EmptyTrainingSet, "outdata: no other dataset to evaluate '" + test_dataset + "' on");
      }
      break;
    case Regime::AucOnly:
      break;
  }
  if (regime != Regime::AucOnly && plan.train_datasets.empty()) {
    throw Error(ErrorKind::EmptyTrainingSet,
                std::string(to_string(regime)) + ": no training dataset for '" + test_dataset + "'");
  }
  return plan;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform draw from [0, bound) by rejection, independent of the standard
// library's distribution implementations.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % bound);
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

}  // namespace

std::uint64_t repetition_seed(std::uint64_t base_seed, const std::string& model, const std::string& dataset,
                              int repetition) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, model);
  h = fnv1a(h, std::string_view("\0", 1));
  h = fnv1a(h, dataset);
  std::uint64_t s = splitmix64(base_seed);
  s = splitmix64(s ^ h);
  return splitmix64(s ^ static_cast<std::uint64_t>(repetition));
}

IndexSplit indata_split(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::InvalidSpec, "split ratio must lie in (0, 1)");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded_draw(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  IndexSplit split;
  split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

const EvalCell* ProtocolRun::find(const std::string& model, const std::string& dataset) const {
  for (const auto& c : cells) {
    if (c.model_id == model && c.dataset_id == dataset) return &c;
  }
  return nullptr;
}

const ModelMean& ProtocolRun::mean_of(const std::string& model) const {
  for (const auto& m : means) {
    if (m.model_id == model) return m;
  }
  throw Error(ErrorKind::UnknownModel, "model '" + model + "'");
}

const char* ProtocolRun::metric_name() const {
  return spec.regime == Regime::AucOnly ? "auc" : "accuracy";
}

namespace {

bool single_class(const std::vector<int>& labels) {
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  return pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size());
}

void mark_missing(EvalCell& cell) {
  cell.accuracy = kNaN;
  cell.kappa = kNaN;
  cell.degenerate = true;
}

struct Scored {
  double accuracy;
  double kappa;
};

Scored evaluate(const Calibrator& cal, const Slice& test) {
  const auto decisions = decide_all(cal, test.scores);
  return {accuracy(decisions, test.labels), kappa(decisions, test.labels)};
}

EvalCell evaluate_cell(const BenchmarkCorpus& corpus, const ProtocolSpec& spec, const std::string& model,
                       const std::string& dataset) {
  EvalCell cell;
  cell.model_id = model;
  cell.dataset_id = dataset;

  if (spec.regime == Regime::AucOnly) {
    const auto s = slice(corpus, model, {dataset});
    if (single_class(s.labels)) {
      mark_missing(cell);
    } else {
      cell.accuracy = auc(s.scores, s.labels);
      cell.kappa = kNaN;
    }
    return cell;
  }

  TrainingPlan plan;
  try {
    plan = training_sets(spec.regime, corpus, dataset);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyTrainingSet) throw;
    mark_missing(cell);
    return cell;
  }
  cell.indata_fallback = plan.indata_fallback;

  if (plan.within_dataset_split) {
    const auto full = slice(corpus, model, {dataset});
    double acc_sum = 0.0;
    double kappa_sum = 0.0;
    for (int rep = 0; rep < spec.indata_reps; ++rep) {
      const auto split = indata_split(full.scores.size(), spec.indata_ratio,
                                      repetition_seed(spec.seed, model, dataset, rep));
      if (split.train.empty()) {
        mark_missing(cell);
        return cell;
      }
      Slice train;
      Slice test;
      for (auto i : split.train) {
        train.scores.push_back(full.scores[i]);
        train.labels.push_back(full.labels[i]);
      }
      for (auto i : split.test) {
        test.scores.push_back(full.scores[i]);
        test.labels.push_back(full.labels[i]);
      }
      if (single_class(train.labels)) cell.degenerate = true;
      const auto r = evaluate(fit(spec.method, train.scores, train.labels), test);
      acc_sum += r.accuracy;
      kappa_sum += r.kappa;
      cell.train_size = train.scores.size();
    }
    cell.accuracy = acc_sum / spec.indata_reps;
    cell.kappa = kappa_sum / spec.indata_reps;
    return cell;
  }

  const auto train = slice(corpus, model, plan.train_datasets);
  if (train.scores.empty()) {
    mark_missing(cell);
    return cell;
  }
  cell.train_size = train.scores.size();
  cell.degenerate = single_class(train.labels);
  const auto cal = fit(spec.method, train.scores, train.labels);
  cell.calibrator = cal;

  double acc_sum = 0.0;
  double kappa_sum = 0.0;
  int evaluated = 0;
  for (const auto& e : plan.eval_datasets) {
    if (!corpus.covers(model, e)) continue;
    const auto r = evaluate(cal, slice(corpus, model, {e}));
    acc_sum += r.accuracy;
    kappa_sum += r.kappa;
    ++evaluated;
  }
  if (evaluated == 0) {
    mark_missing(cell);
    return cell;
  }
  cell.accuracy = acc_sum / evaluated;
  cell.kappa = kappa_sum / evaluated;
  return cell;
}

double finite_mean(const std::vector<double>& xs) {
  double sum = 0.0;
  int n = 0;
  for (double x : xs) {
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  }
  return n == 0 ? kNaN : sum / n;
}

}  // namespace

ProtocolRun run_protocol(const BenchmarkCorpus& corpus, const ProtocolSpec& spec, const RunOptions& options) {
  spec.validate();
  ProtocolRun run;
  run.spec = spec;
  run.models = corpus.models();
  run.datasets = corpus.datasets();

  std::vector<std::pair<std::string, std::string>> tasks;
  for (const auto& m : run.models) {
    for (const auto& d : run.datasets) {
      if (corpus.covers(m, d)) tasks.emplace_back(m, d);
    }
  }

  run.cells.resize(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& [model, dataset] = tasks[i];
      try {
        run.cells[i] = evaluate_cell(corpus, spec, model, dataset);
      } catch (const Error& e) {
        failures[i] = std::make_exception_ptr(
            Error(e.kind(), "model '" + model + "', dataset '" + dataset + "': " + e.what()));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, tasks.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  for (const auto& m : run.models) {
    std::vector<double> accs;
    std::vector<double> kappas;
    for (const auto& c : run.cells) {
      if (c.model_id != m) continue;
      accs.push_back(c.accuracy);
      kappas.push_back(c.kappa);
    }
    run.means.push_back({m, finite_mean(accs), finite_mean(kappas)});
  }
  return run;
}

BestKappaRun combine_best_kappa(std::vector<ProtocolRun> runs) {
  if (runs.empty()) throw Error(ErrorKind::EmptyInput, "combine_best_kappa needs at least one run");
  const auto& first = runs.front();
  BestKappaRun best;
  best.regime = first.spec.regime;
  best.seed = first.spec.seed;
  best.models = first.models;
  best.datasets = first.datasets;

  for (const auto& cell : first.cells) {
    KappaCell out;
    out.model_id = cell.model_id;
    out.dataset_id = cell.dataset_id;
    out.kappa = kNaN;
    for (const auto& run : runs) {
      const auto* c = run.find(cell.model_id, cell.dataset_id);
      if (!c) continue;
      out.degenerate = out.degenerate || c->degenerate;
      out.indata_fallback = out.indata_fallback || c->indata_fallback;
      if (std::isfinite(c->kappa) && !(c->kappa <= out.kappa)) {
        out.kappa = c->kappa;
        out.best_method = run.spec.method;
      }
    }
    best.cells.push_back(out);
  }
  for (const auto& m : best.models) {
    KappaMean out{m, kNaN, Method::None};
    for (const auto& run : runs) {
      const double k = run.mean_of(m).kappa;
      if (std::isfinite(k) && !(k <= out.kappa)) {
        out.kappa = k;
        out.best_method = run.spec.method;
      }
    }
    best.means.push_back(out);
  }
  best.per_method = std::move(runs);
  return best;
}

BestKappaRun kappa_best_over_methods(const BenchmarkCorpus& corpus, Regime regime, std::uint64_t seed,
                                     double indata_ratio, int indata_reps, const RunOptions& options) {
  if (regime == Regime::AucOnly) throw Error(ErrorKind::InvalidSpec, "kappa needs a calibration regime");
  std::vector<ProtocolRun> runs;
  for (auto method : calibration_methods()) {
    runs.push_back(run_protocol(corpus, {regime, method, indata_ratio, indata_reps, seed}, options));
  }
  return combine_best_kappa(std::move(runs));
}

namespace {

std::vector<double> column(const ProtocolRun& run, const std::string& dataset, bool use_kappa) {
  std::vector<double> values;
  for (const auto& m : run.models) {
    const auto* c = run.find(m, dataset);
    values.push_back(c ? (use_kappa ? c->kappa : c->accuracy) : kNaN);
  }
  return values;
}

std::vector<double> mean_column(const ProtocolRun& run, bool use_kappa) {
  std::vector<double> values;
  for (const auto& m : run.means) values.push_back(use_kappa ? m.kappa : m.accuracy);
  return values;
}

int rank_at(const std::vector<int>& ranks, const std::vector<std::string>& models, const std::string& model) {
  const auto it = std::find(models.begin(), models.end(), model);
  return ranks[static_cast<std::size_t>(it - models.begin())];
}

}  // namespace

json to_json(const ProtocolRun& run) {
  json j;
  j["regime"] = to_string(run.spec.regime);
  j["method"] = to_string(run.spec.method);
  j["metric"] = run.metric_name();
  j["seed"] = run.spec.seed;
  j["indata_reps"] = run.spec.indata_reps;
  j["indata_ratio"] = run.spec.indata_ratio;
  j["models"] = run.models;
  j["datasets"] = run.datasets;

  std::map<std::string, std::vector<int>> acc_ranks;
  std::map<std::string, std::vector<int>> kappa_ranks;
  for (const auto& d : run.datasets) {
    acc_ranks[d] = rank_models(column(run, d, false));
    kappa_ranks[d] = rank_models(column(run, d, true));
  }
  json cells = json::array();
  for (const auto& c : run.cells) {
    json cj = {{"model", c.model_id},
               {"dataset", c.dataset_id},
               {"value", c.accuracy},
               {"kappa", c.kappa},
               {"rank", rank_at(acc_ranks[c.dataset_id], run.models, c.model_id)},
               {"kappa_rank", rank_at(kappa_ranks[c.dataset_id], run.models, c.model_id)},
               {"train_size", c.train_size},
               {"degenerate", c.degenerate},
               {"indata_fallback", c.indata_fallback}};
    if (c.calibrator) cj["calibrator"] = to_json(*c.calibrator);
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);

  const auto mean_ranks = rank_models(mean_column(run, false));
  const auto mean_kappa_ranks = rank_models(mean_column(run, true));
  json means = json::array();
  for (std::size_t i = 0; i < run.means.size(); ++i) {
    means.push_back({{"model", run.means[i].model_id},
                     {"value", run.means[i].accuracy},
                     {"kappa", run.means[i].kappa},
                     {"rank", mean_ranks[i]},
                     {"kappa_rank", mean_kappa_ranks[i]}});
  }
  j["means"] = std::move(means);
  return j;
}

std::string to_csv(const ProtocolRun& run) {
  std::ostringstream out;
  out << "model,dataset,metric,value,rank,degenerate\n";
  const bool with_kappa = run.spec.regime != Regime::AucOnly;
  auto emit = [&](const std::string& model, const std::string& dataset, const char* metric, double value,
                  int rank, bool degenerate) {
    out << detail::csv_escape(model) << ',' << detail::csv_escape(dataset) << ',' << metric << ','
        << detail::format_double(value) << ',' << rank << ',' << (degenerate ? 1 : 0) << '\n';
  };
  for (const auto& d : run.datasets) {
    const auto acc_ranks = rank_models(column(run, d, false));
    const auto kappa_ranks = rank_models(column(run, d, true));
    for (std::size_t i = 0; i < run.models.size(); ++i) {
      const auto* c = run.find(run.models[i], d);
      if (!c) continue;
      emit(c->model_id, d, run.metric_name(), c->accuracy, acc_ranks[i], c->degenerate);
      if (with_kappa) emit(c->model_id, d, "kappa", c->kappa, kappa_ranks[i], c->degenerate);
    }
  }
  const auto mean_ranks = rank_models(mean_column(run, false));
  const auto mean_kappa_ranks = rank_models(mean_column(run, true));
  for (std::size_t i = 0; i < run.means.size(); ++i) {
    emit(run.means[i].model_id, "mean", run.metric_name(), run.means[i].accuracy, mean_ranks[i], false);
    if (with_kappa) emit(run.means[i].model_id, "mean", "kappa", run.means[i].kappa, mean_kappa_ranks[i], false);
  }
  return out.str();
}

}  // namespace calibench
