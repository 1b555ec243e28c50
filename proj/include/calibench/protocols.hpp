#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "calibench/calibrate.hpp"
#include "calibench/corpus.hpp"

namespace calibench {

// Which datasets supply calibration data relative to the test dataset.
enum class Regime { XDomain, OutDomain, InDomain, InData, OutData, AucOnly };

Regime parse_regime(std::string_view name);
const char* to_string(Regime regime);
const std::vector<Regime>& calibration_regimes();
const std::vector<Method>& calibration_methods();

struct ProtocolSpec {
  Regime regime = Regime::XDomain;
  Method method = Method::Logistic;
  double indata_ratio = 0.8;
  int indata_reps = 100;
  std::uint64_t seed = 0;

  // Throws InvalidSpec when method == None does not coincide with AucOnly,
  // or the ratio/repetition bounds are violated.
  void validate() const;
};

// Training data for one test dataset under one regime.
struct TrainingPlan {
  // Datasets pooled for fitting (the test dataset itself for OutData).
  std::vector<std::string> train_datasets;
  // Datasets evaluated with the fitted calibrator. For OutData these are all
  // other datasets; otherwise just the test dataset.
  std::vector<std::string> eval_datasets;
  // Train and test are random index splits of the test dataset.
  bool within_dataset_split = false;
  // InDomain fell back to InData because the test dataset is alone in its domain.
  bool indata_fallback = false;
};

TrainingPlan training_sets(Regime regime, const BenchmarkCorpus& corpus, const std::string& test_dataset);

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// floor(ratio * n) training indices from a seeded uniform shuffle of 0..n-1.
IndexSplit indata_split(std::size_t n, double ratio, std::uint64_t seed);

// Seed for one InData repetition; depends only on its arguments.
std::uint64_t repetition_seed(std::uint64_t base_seed, const std::string& model, const std::string& dataset,
                              int repetition);

struct EvalCell {
  std::string model_id;
  std::string dataset_id;
  // Expected accuracy, or AUC for AucOnly runs. NaN when no value exists.
  double accuracy = 0.0;
  double kappa = 0.0;
  std::size_t train_size = 0;
  // Single-class (or empty) training data, or a single-class test set under AucOnly.
  bool degenerate = false;
  bool indata_fallback = false;
  // Fitted calibrator for regimes that fit exactly once per cell.
  std::optional<Calibrator> calibrator;
};

struct ModelMean {
  std::string model_id;
  double accuracy = 0.0;
  double kappa = 0.0;
};

struct ProtocolRun {
  ProtocolSpec spec;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  // Row-major over models, then datasets; only covered pairs appear.
  std::vector<EvalCell> cells;
  // Unweighted mean over each model's non-NaN cells, in model order.
  std::vector<ModelMean> means;

  const EvalCell* find(const std::string& model, const std::string& dataset) const;
  const ModelMean& mean_of(const std::string& model) const;
  // "auc" for AucOnly runs, "accuracy" otherwise.
  const char* metric_name() const;
};

struct RunOptions {
  // 0 picks the hardware concurrency.
  unsigned threads = 0;
};

ProtocolRun run_protocol(const BenchmarkCorpus& corpus, const ProtocolSpec& spec, const RunOptions& options = {});

struct KappaCell {
  std::string model_id;
  std::string dataset_id;
  double kappa = 0.0;
  Method best_method = Method::None;
  bool degenerate = false;
  bool indata_fallback = false;
};

struct KappaMean {
  std::string model_id;
  double kappa = 0.0;
  Method best_method = Method::None;
};

struct BestKappaRun {
  Regime regime = Regime::XDomain;
  std::uint64_t seed = 0;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  std::vector<KappaCell> cells;
  // Per-model maximum over the three methods' mean kappa.
  std::vector<KappaMean> means;
  // The underlying per-method runs (logistic, isotonic, stump).
  std::vector<ProtocolRun> per_method;
};

// Runs the regime under logistic, isotonic and stump and keeps the maximum
// kappa per cell and per model mean.
BestKappaRun kappa_best_over_methods(const BenchmarkCorpus& corpus, Regime regime, std::uint64_t seed,
                                     double indata_ratio = 0.8, int indata_reps = 100,
                                     const RunOptions& options = {});

// Combines per-method runs of one regime by per-cell and per-mean maximum.
BestKappaRun combine_best_kappa(std::vector<ProtocolRun> runs);

nlohmann::json to_json(const ProtocolRun& run);

// model,dataset,metric,value,rank,degenerate rows; ranks are per dataset and
// "mean" rows carry the per-model means.
std::string to_csv(const ProtocolRun& run);

}  // namespace calibench
