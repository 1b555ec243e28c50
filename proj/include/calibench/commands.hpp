#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "calibench/calibrate.hpp"
#include "calibench/errors.hpp"
#include "calibench/corpus.hpp"
#include "calibench/protocols.hpp"
#include "calibench/report.hpp"

namespace calibench {

struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path registry_path;
  FileFormat format = FileFormat::Csv;
  std::vector<Regime> regimes;
  std::vector<Method> methods;
  std::optional<std::uint64_t> seed;
  int indata_reps = 100;
  double indata_ratio = 0.8;
  std::filesystem::path out_dir = ".";
  ReportFormat report_format = ReportFormat::Markdown;
  unsigned threads = 0;
  int histogram_bins = 20;
};

// Thrown for invalid configurations (missing paths, missing seed, bad flags).
// The CLI maps it to exit code 2; every other Error maps to 1.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorKind::InvalidSpec, message) {}
};

// Each command returns the report files it wrote, in write order.
std::vector<std::filesystem::path> cmd_auc(const RunConfig& config);
std::vector<std::filesystem::path> cmd_calibrate(const RunConfig& config);
std::vector<std::filesystem::path> cmd_kappa(const RunConfig& config);
std::vector<std::filesystem::path> cmd_analyze(const RunConfig& config);

// Writes corpus.<ext> and registry.<ext> for make_rank_flip_fixture(seed).
std::vector<std::filesystem::path> cmd_fixture(std::uint64_t seed, const std::filesystem::path& out_dir,
                                               FileFormat format = FileFormat::Csv);

// Delta/variance/group tables for a pair of rank reports; used by cmd_analyze.
struct AnalysisTables {
  ReportTable deltas;
  ReportTable groups;
  ReportTable by_dataset;
};
AnalysisTables analysis_tables(const RankReport& auc_report, const RankReport& acc_report,
                               const BenchmarkCorpus& corpus, const ReportHeader& header);

}  // namespace calibench
