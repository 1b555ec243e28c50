#include "calibench/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "calibench/analysis.hpp"
#include "calibench/fixture.hpp"
#include "text_io.hpp"

namespace calibench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool needs_seed(Regime r) { return r == Regime::InData || r == Regime::InDomain; }

void validate(const RunConfig& config, const char* command) {
  if (config.corpus_path.empty() || !fs::exists(config.corpus_path)) {
    throw ConfigError(std::string(command) + ": corpus file '" + config.corpus_path.string() + "' does not exist");
  }
  if (config.registry_path.empty() || !fs::exists(config.registry_path)) {
    throw ConfigError(std::string(command) + ": registry file '" + config.registry_path.string() +
                      "' does not exist");
  }
  if (config.indata_reps < 1) throw ConfigError("--reps must be at least 1");
  if (!(config.indata_ratio > 0.0 && config.indata_ratio < 1.0)) throw ConfigError("--ratio must lie in (0, 1)");
  if (config.histogram_bins < 1) throw ConfigError("histogram bin count must be at least 1");
  for (auto r : config.regimes) {
    if (needs_seed(r) && !config.seed) {
      throw ConfigError(std::string(command) + ": regime '" + to_string(r) + "' is randomized and needs --seed");
    }
  }
}

std::vector<Regime> calibration_regimes_of(const RunConfig& config, const char* command) {
  if (config.regimes.empty()) throw ConfigError(std::string(command) + ": select at least one regime");
  for (auto r : config.regimes) {
    if (r == Regime::AucOnly) {
      throw ConfigError(std::string(command) + ": regime 'auconly' is produced by the auc command");
    }
  }
  return config.regimes;
}

std::vector<Method> methods_of(const RunConfig& config) {
  if (config.methods.empty()) return calibration_methods();
  for (auto m : config.methods) {
    if (m == Method::None) throw ConfigError("method 'none' only applies to the auc command");
  }
  return config.methods;
}

BenchmarkCorpus load(const RunConfig& config) {
  return load_corpus(config.corpus_path, config.format, config.registry_path);
}

ReportHeader header_for(const RunConfig& config, const std::string& command, const std::string& regime,
                        const std::string& method) {
  return {command, regime, method, config.seed, config.indata_reps, config.indata_ratio};
}

ProtocolSpec spec_for(const RunConfig& config, Regime regime, Method method) {
  return {regime, method, config.indata_ratio, config.indata_reps, config.seed.value_or(0)};
}

fs::path report_path(const RunConfig& config, const std::string& command, const std::string& regime,
                     const std::string& method, const std::string& suffix = "") {
  return config.out_dir /
         (command + "_" + regime + "_" + method + suffix + "." + extension(config.report_format));
}

std::string file_safe(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

std::vector<double> mean_values(const ProtocolRun& run) {
  std::vector<double> out;
  for (const auto& m : run.means) out.push_back(m.accuracy);
  return out;
}

std::vector<bool> fallback_models(const ProtocolRun& run) {
  std::vector<bool> out;
  for (const auto& m : run.models) {
    bool any = false;
    for (const auto& c : run.cells) any = any || (c.model_id == m && c.indata_fallback);
    out.push_back(any);
  }
  return out;
}

ReportGrid summary_grid(const ProtocolRun& auc_run, ReportHeader header, std::string title) {
  ReportGrid grid;
  grid.header = std::move(header);
  grid.title = std::move(title);
  grid.row_header = "metric";
  grid.metric = "mean";
  grid.columns = auc_run.models;
  add_summary_row(grid, "AUC", mean_values(auc_run));
  return grid;
}

void write(const fs::path& path, const std::string& contents, std::vector<fs::path>& written) {
  detail::write_text_file(path, contents);
  written.push_back(path);
}

const char* group_name(int delta) { return delta > 0 ? "better" : (delta < 0 ? "worse" : "unchanged"); }

}  // namespace

std::vector<fs::path> cmd_auc(const RunConfig& config) {
  validate(config, "auc");
  const auto corpus = load(config);
  const auto run = run_protocol(corpus, {Regime::AucOnly, Method::None, config.indata_ratio, config.indata_reps,
                                         config.seed.value_or(0)},
                                {config.threads});
  const auto grid = grid_from_run(run, header_for(config, "auc", "auconly", "none"), "AUC evaluation (x100)");
  std::vector<fs::path> written;
  write(report_path(config, "auc", "auconly", "none"), render(grid, config.report_format), written);
  return written;
}

std::vector<fs::path> cmd_calibrate(const RunConfig& config) {
  validate(config, "calibrate");
  const auto regimes = calibration_regimes_of(config, "calibrate");
  const auto methods = methods_of(config);
  const auto corpus = load(config);

  const auto auc_run = run_protocol(corpus, {Regime::AucOnly, Method::None, config.indata_ratio,
                                             config.indata_reps, config.seed.value_or(0)},
                                    {config.threads});
  auto summary = summary_grid(auc_run, header_for(config, "calibrate", "summary", "all"),
                              "Mean performance over all data sets (x100)");

  std::vector<fs::path> written;
  for (auto regime : regimes) {
    for (auto method : methods) {
      const auto run = run_protocol(corpus, spec_for(config, regime, method), {config.threads});
      const std::string r = to_string(regime);
      const std::string m = to_string(method);
      const auto grid = grid_from_run(run, header_for(config, "calibrate", r, m),
                                      "Expected accuracy evaluation (x100), " + r + ", " + m);
      write(report_path(config, "calibrate", r, m), render(grid, config.report_format), written);
      add_summary_row(summary, r + "/" + m, mean_values(run), fallback_models(run));
    }
  }
  write(report_path(config, "calibrate", "summary", "all"), render(summary, config.report_format), written);
  return written;
}

std::vector<fs::path> cmd_kappa(const RunConfig& config) {
  validate(config, "kappa");
  const auto regimes = calibration_regimes_of(config, "kappa");
  const auto corpus = load(config);

  const auto auc_run = run_protocol(corpus, {Regime::AucOnly, Method::None, config.indata_ratio,
                                             config.indata_reps, config.seed.value_or(0)},
                                    {config.threads});
  auto summary = summary_grid(auc_run, header_for(config, "kappa", "summary", "best"),
                              "Kappa after calibration (x100), best over three calibration methods");

  std::vector<fs::path> written;
  for (auto regime : regimes) {
    const auto best = kappa_best_over_methods(corpus, regime, config.seed.value_or(0), config.indata_ratio,
                                              config.indata_reps, {config.threads});
    const std::string r = to_string(regime);
    const auto grid = grid_from_best_kappa(best, header_for(config, "kappa", r, "best"),
                                           "Kappa evaluation (x100), " + r + ", best over methods");
    write(report_path(config, "kappa", r, "best"), render(grid, config.report_format), written);
    std::vector<double> means;
    for (const auto& m : best.means) means.push_back(m.kappa);
    add_summary_row(summary, "kappa, " + r, means);
  }
  write(report_path(config, "kappa", "summary", "best"), render(summary, config.report_format), written);
  return written;
}

AnalysisTables analysis_tables(const RankReport& auc_report, const RankReport& acc_report,
                               const BenchmarkCorpus& corpus, const ReportHeader& header) {
  const auto deltas = rank_delta(auc_report, acc_report);
  const auto groups = group_by_delta(deltas, corpus);

  AnalysisTables t;
  t.deltas.header = header;
  t.deltas.title = "Mean-row rank change from AUC to expected accuracy";
  t.deltas.columns = {"model", "rank_auc", "rank_acc", "delta", "variance", "group"};
  for (const auto& d : deltas) {
    t.deltas.rows.push_back({d.model, d.rank_auc, d.rank_acc, d.delta, score_variance(corpus, d.model),
                             group_name(d.delta)});
  }

  t.groups.header = header;
  t.groups.title = "Score variance of models that rank better/worse under expected accuracy";
  t.groups.columns = {"group", "models", "count", "mean_variance"};
  auto add_group = [&](const char* name, const ModelGroup& g) {
    std::string members;
    for (const auto& m : g.models) members += (members.empty() ? "" : " ") + m;
    t.groups.rows.push_back({name, members, g.models.size(),
                             std::isfinite(g.mean_variance) ? json(g.mean_variance) : json(nullptr)});
  };
  add_group("better", groups.better);
  add_group("worse", groups.worse);
  add_group("unchanged", groups.unchanged);

  t.by_dataset.header = header;
  t.by_dataset.title = "Per-dataset rank change from AUC to expected accuracy";
  t.by_dataset.columns = {"dataset", "model", "rank_auc", "rank_acc", "delta"};
  for (const auto& [dataset, row] : rank_delta_by_dataset(auc_report, acc_report)) {
    for (const auto& d : row) t.by_dataset.rows.push_back({dataset, d.model, d.rank_auc, d.rank_acc, d.delta});
  }
  return t;
}

std::vector<fs::path> cmd_analyze(const RunConfig& config) {
  validate(config, "analyze");
  const Regime regime = config.regimes.empty() ? Regime::XDomain : config.regimes.front();
  const Method method = config.methods.empty() ? Method::Logistic : config.methods.front();
  if (regime == Regime::AucOnly || method == Method::None) {
    throw ConfigError("analyze compares AUC with a calibrated regime and method");
  }
  const auto corpus = load(config);
  const auto auc_run = run_protocol(corpus, {Regime::AucOnly, Method::None, config.indata_ratio,
                                             config.indata_reps, config.seed.value_or(0)},
                                    {config.threads});
  const auto acc_run = run_protocol(corpus, spec_for(config, regime, method), {config.threads});

  const std::string r = to_string(regime);
  const std::string m = to_string(method);
  const auto tables =
      analysis_tables(rank_report(auc_run), rank_report(acc_run), corpus, header_for(config, "analyze", r, m));

  std::vector<fs::path> written;
  write(report_path(config, "analyze", r, m), render(tables.deltas, config.report_format), written);
  write(report_path(config, "analyze", r, m, "_groups"), render(tables.groups, config.report_format), written);
  write(report_path(config, "analyze", r, m, "_by_dataset"), render(tables.by_dataset, config.report_format),
        written);
  for (const auto& model : corpus.models()) {
    const auto h = histogram(corpus, model, config.histogram_bins);
    write(config.out_dir / ("hist_" + file_safe(model) + ".csv"), to_csv(h), written);
  }
  return written;
}

std::vector<fs::path> cmd_fixture(std::uint64_t seed, const fs::path& out_dir, FileFormat format) {
  const auto corpus = make_rank_flip_fixture({seed});
  const std::string ext = format == FileFormat::Csv ? "csv" : "jsonl";
  const auto corpus_path = out_dir / ("corpus." + ext);
  const auto registry_path = out_dir / ("registry." + ext);
  write_corpus(corpus, corpus_path, format);
  write_registry(corpus.registry(), registry_path, format);
  return {corpus_path, registry_path};
}

}  // namespace calibench
