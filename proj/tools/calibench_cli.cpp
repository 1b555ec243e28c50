// calibench: calibration-aware benchmarking of binary-decision models.
//
//   calibench fixture   --seed 42 --out data/
//   calibench auc       --corpus data/corpus.csv --registry data/registry.csv --out reports/
//   calibench calibrate --corpus ... --registry ... --regime xdomain,indata --seed 7 --out reports/
//   calibench kappa     --corpus ... --registry ... --regime all --seed 7
//   calibench analyze   --corpus ... --registry ... --regime xdomain --method logistic
//
// Exit codes: 0 success, 1 data error, 2 configuration error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "calibench/commands.hpp"
#include "calibench/errors.hpp"

namespace {

constexpr int kExitData = 1;
constexpr int kExitConfig = 2;

struct Flags {
  std::string corpus;
  std::string registry;
  std::string format = "csv";
  std::vector<std::string> regimes;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> seed;
  int reps = 100;
  double ratio = 0.8;
  std::string out = ".";
  std::string report_format = "markdown";
  unsigned threads = 0;
  int bins = 20;
};

void add_run_flags(CLI::App* cmd, Flags& f, bool with_method) {
  cmd->add_option("--corpus", f.corpus, "Score file with columns model,dataset,item,score,label")->required();
  cmd->add_option("--registry", f.registry, "Registry file with columns dataset,domain")->required();
  cmd->add_option("--format", f.format, "Score file format")->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--regime", f.regimes, "xdomain, outdomain, indomain, indata, outdata, or all")->delimiter(',');
  if (with_method) {
    cmd->add_option("--method", f.methods, "logistic, isotonic, stump, or all")->delimiter(',');
  }
  cmd->add_option("--seed", f.seed, "Seed for randomized regimes (required for indata/indomain)");
  cmd->add_option("--reps", f.reps, "InData repetitions");
  cmd->add_option("--ratio", f.ratio, "InData training fraction");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--report-format", f.report_format, "csv, markdown or json")
      ->check(CLI::IsMember({"csv", "markdown", "md", "json"}));
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

calibench::RunConfig to_config(const Flags& f, std::vector<calibench::Regime> default_regimes) {
  calibench::RunConfig c;
  c.corpus_path = f.corpus;
  c.registry_path = f.registry;
  c.format = calibench::parse_file_format(f.format);
  for (const auto& r : f.regimes) {
    if (r == "all") {
      c.regimes = calibench::calibration_regimes();
      break;
    }
    c.regimes.push_back(calibench::parse_regime(r));
  }
  if (c.regimes.empty()) c.regimes = std::move(default_regimes);
  for (const auto& m : f.methods) {
    if (m == "all") {
      c.methods = calibench::calibration_methods();
      break;
    }
    c.methods.push_back(calibench::parse_method(m));
  }
  c.seed = f.seed;
  c.indata_reps = f.reps;
  c.indata_ratio = f.ratio;
  c.out_dir = f.out;
  c.report_format = calibench::parse_report_format(f.report_format);
  c.threads = f.threads;
  c.histogram_bins = f.bins;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration-aware benchmarking of binary-decision models"};
  app.require_subcommand(1);

  Flags flags;
  auto* auc = app.add_subcommand("auc", "Per-dataset AUC table with ranks");
  add_run_flags(auc, flags, false);
  auto* calibrate = app.add_subcommand("calibrate", "Expected accuracy under calibration regimes and methods");
  add_run_flags(calibrate, flags, true);
  auto* kappa = app.add_subcommand("kappa", "Kappa per regime, best over the three calibration methods");
  add_run_flags(kappa, flags, false);
  auto* analyze = app.add_subcommand("analyze", "AUC vs accuracy rank changes, score variance, histograms");
  add_run_flags(analyze, flags, true);
  analyze->add_option("--bins", flags.bins, "Histogram bins");

  std::uint64_t fixture_seed = 42;
  std::string fixture_out = ".";
  std::string fixture_format = "csv";
  auto* fixture = app.add_subcommand("fixture", "Write the seeded synthetic rank-flip corpus");
  fixture->add_option("--seed", fixture_seed, "Generator seed");
  fixture->add_option("--out", fixture_out, "Output directory");
  fixture->add_option("--format", fixture_format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    std::vector<std::filesystem::path> written;
    if (*fixture) {
      written = calibench::cmd_fixture(fixture_seed, fixture_out, calibench::parse_file_format(fixture_format));
    } else if (*auc) {
      written = calibench::cmd_auc(to_config(flags, {}));
    } else if (*calibrate) {
      written = calibench::cmd_calibrate(to_config(flags, {calibench::Regime::XDomain}));
    } else if (*kappa) {
      written = calibench::cmd_kappa(to_config(flags, {calibench::Regime::XDomain}));
    } else if (*analyze) {
      written = calibench::cmd_analyze(to_config(flags, {calibench::Regime::XDomain}));
    }
    for (const auto& p : written) std::cout << p.string() << '\n';
  } catch (const calibench::Error& e) {
    std::cerr << "calibench: " << e.what() << '\n';
    return e.kind() == calibench::ErrorKind::InvalidSpec ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "calibench: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
