#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>

#include "calibench/analysis.hpp"
#include "calibench/commands.hpp"
#include "calibench/errors.hpp"
#include "calibench/fixture.hpp"
#include "calibench/metrics.hpp"
#include "calibench/report.hpp"
#include "test_support.hpp"

using namespace calibench;
using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CALIBENCH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig config_for(const fs::path& dir, ReportFormat fmt = ReportFormat::Markdown) {
  RunConfig c;
  c.corpus_path = dir / "corpus.csv";
  c.registry_path = dir / "registry.csv";
  c.out_dir = dir / "out";
  c.report_format = fmt;
  return c;
}

// Two datasets in different domains; model "perfect" scores equal labels.
void write_perfect_corpus(const fs::path& dir) {
  write_file(dir / "corpus.csv",
             "model,dataset,item,score,label\n"
             "perfect,d1,a,1,1\nperfect,d1,b,0,0\nperfect,d1,c,1,1\nperfect,d1,d,0,0\n"
             "perfect,d2,a,0,0\nperfect,d2,b,1,1\nperfect,d2,c,0,0\n");
  write_file(dir / "registry.csv", "dataset,domain\nd1,x\nd2,y\n");
}

}  // namespace

TEST_CASE("fixture seed 42 builds, reloads, and shows the rank flip") {
  const auto corpus = make_rank_flip_fixture({42});
  CHECK(corpus.models() == std::vector<std::string>{"sharp", "smooth"});
  CHECK(corpus.datasets().size() == 4);
  CHECK(corpus.registry().domains().size() == 2);

  const auto aucs = run_protocol(corpus, {Regime::AucOnly, Method::None});
  for (const auto& d : corpus.datasets()) CHECK(aucs.find("sharp", d)->accuracy >= aucs.find("smooth", d)->accuracy);
  const auto acc = run_protocol(corpus, {Regime::XDomain, Method::Logistic});
  CHECK(acc.mean_of("smooth").accuracy > acc.mean_of("sharp").accuracy);
  CHECK(rank_report(aucs).mean_rank_of("sharp") == 1);
  CHECK(rank_report(acc).mean_rank_of("smooth") == 1);

  TempDir dir;
  const auto files = cmd_fixture(42, dir.path());
  const auto loaded = load_corpus(files[0], FileFormat::Csv, files[1]);
  CHECK(loaded.records().size() == corpus.records().size());
  const auto files2 = cmd_fixture(42, dir / "again");
  CHECK(read_file(files[0]) == read_file(files2[0]));
  CHECK(read_file(files[1]) == read_file(files2[1]));
  const auto jl = cmd_fixture(42, dir / "jl", FileFormat::Jsonl);
  CHECK(load_corpus(jl[0], FileFormat::Jsonl, jl[1]).records().size() == corpus.records().size());
}

TEST_CASE("auc on the perfect model renders 100.0 | 1 cells") {
  TempDir dir;
  write_perfect_corpus(dir.path());
  const auto files = cmd_auc(config_for(dir.path()));
  REQUIRE(files.size() == 1);
  CHECK(files[0].filename() == "auc_auconly_none.md");
  const auto text = read_file(files[0]);
  CHECK(text.find("| d1 | 100.0 \\| 1 |") != std::string::npos);
  CHECK(text.find("| d2 | 100.0 \\| 1 |") != std::string::npos);
  CHECK(text.find("| mean | 100.0 \\| 1 |") != std::string::npos);
  CHECK(text.find("command=auc") != std::string::npos);
}

TEST_CASE("auc on the four-point example renders 75.0") {
  TempDir dir;
  write_file(dir / "corpus.csv",
             "model,dataset,item,score,label\nm,d1,a,0.1,0\nm,d1,b,0.4,0\nm,d1,c,0.35,1\nm,d1,d,0.8,1\n");
  write_file(dir / "registry.csv", "dataset,domain\nd1,x\n");
  const auto text = read_file(cmd_auc(config_for(dir.path()))[0]);
  CHECK(text.find("| d1 | 75.0 \\| 1 |") != std::string::npos);
}

TEST_CASE("kappa on the perfect model is 100 and on a constant model is 0") {
  TempDir dir;
  write_perfect_corpus(dir.path());
  auto cfg = config_for(dir.path(), ReportFormat::Json);
  cfg.regimes = {Regime::XDomain};
  const auto files = cmd_kappa(cfg);
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "kappa_xdomain_best.json");
  CHECK(files[1].filename() == "kappa_summary_best.json");
  const auto j = nlohmann::json::parse(read_file(files[0]));
  for (const auto& row : j["rows"]) CHECK(row["cells"][0]["display"] == "100.0");

  write_file(dir / "corpus.csv",
             "model,dataset,item,score,label\n"
             "flat,d1,a,0.5,1\nflat,d1,b,0.5,0\nflat,d1,c,0.5,1\n"
             "flat,d2,a,0.5,0\nflat,d2,b,0.5,1\nflat,d2,c,0.5,1\n");
  const auto flat = nlohmann::json::parse(read_file(cmd_kappa(cfg)[0]));
  for (const auto& row : flat["rows"]) CHECK(row["cells"][0]["display"] == "0.0");
}

TEST_CASE("kappa report equals the max over per-method calibrate runs") {
  TempDir dir;
  cmd_fixture(42, dir.path());
  auto cfg = config_for(dir.path(), ReportFormat::Json);
  cfg.regimes = {Regime::OutDomain};
  const auto best = nlohmann::json::parse(read_file(cmd_kappa(cfg)[0]));
  const auto corpus = load_corpus(cfg.corpus_path, cfg.format, cfg.registry_path);
  for (const auto& row : best["rows"]) {
    const std::string label = row["label"];
    for (const auto& cell : row["cells"]) {
      const std::string model = cell["model"];
      double mx = -2;
      for (auto m : calibration_methods()) {
        const auto run = run_protocol(corpus, {Regime::OutDomain, m});
        mx = std::max(mx, label == "mean" ? run.mean_of(model).kappa : run.find(model, label)->kappa);
      }
      CHECK(cell["value"].get<double>() == mx);
    }
  }
}

TEST_CASE("calibrate writes one grid per regime and method plus a summary") {
  TempDir dir;
  cmd_fixture(42, dir.path());
  auto cfg = config_for(dir.path(), ReportFormat::Csv);
  cfg.regimes = {Regime::XDomain, Regime::OutData};
  cfg.methods = {Method::Logistic, Method::Stump};
  const auto files = cmd_calibrate(cfg);
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  CHECK(names == std::vector<std::string>{"calibrate_xdomain_logistic.csv", "calibrate_xdomain_stump.csv",
                                          "calibrate_outdata_logistic.csv", "calibrate_outdata_stump.csv",
                                          "calibrate_summary_all.csv"});
  const auto summary = read_file(files.back());
  CHECK(summary.find("sharp,AUC,mean,") != std::string::npos);
  CHECK(summary.find("AVG,xdomain/logistic,") != std::string::npos);

  // The summary ranks differ between the AUC row and the xdomain/logistic row.
  cfg.report_format = ReportFormat::Json;
  const auto j = nlohmann::json::parse(read_file(cmd_calibrate(cfg).back()));
  CHECK(j["rows"][0]["label"] == "AUC");
  CHECK(j["rows"][0]["cells"][0]["rank"] == 1);  // sharp
  CHECK(j["rows"][1]["label"] == "xdomain/logistic");
  CHECK(j["rows"][1]["cells"][1]["rank"] == 1);  // smooth
}

TEST_CASE("indata calibrate reports are byte-identical across runs") {
  TempDir dir;
  cmd_fixture(42, dir.path());
  auto cfg = config_for(dir.path());
  cfg.regimes = {Regime::InData};
  cfg.methods = {Method::Logistic};
  cfg.seed = 7;
  cfg.indata_reps = 100;
  const auto first = read_file(cmd_calibrate(cfg)[0]);
  cfg.threads = 1;
  const auto second = read_file(cmd_calibrate(cfg)[0]);
  CHECK(first == second);
  CHECK(first.find("seed=7") != std::string::npos);
}

TEST_CASE("indomain marks the singleton-domain dataset with the fallback marker") {
  TempDir dir;
  std::string corpus = "model,dataset,item,score,label\n";
  for (const char* d : {"s1", "s2", "p1"}) {
    for (int i = 0; i < 10; ++i) {
      corpus += std::string("m,") + d + ",i" + std::to_string(i) + "," + std::to_string(i * 0.1 + (i % 3) * 0.05) +
                "," + std::to_string(i >= 5 ? 1 : 0) + "\n";
    }
  }
  write_file(dir / "corpus.csv", corpus);
  write_file(dir / "registry.csv", "dataset,domain\ns1,sum\ns2,sum\np1,para\n");
  auto cfg = config_for(dir.path());
  cfg.regimes = {Regime::InDomain};
  cfg.methods = {Method::Isotonic};
  cfg.seed = 3;
  cfg.indata_reps = 5;
  const auto text = read_file(cmd_calibrate(cfg)[0]);
  const auto p1 = text.substr(text.find("| p1 |"));
  CHECK(p1.substr(0, p1.find('\n')).find("***") != std::string::npos);
  const auto s1 = text.substr(text.find("| s1 |"));
  CHECK(s1.substr(0, s1.find('\n')).find("***") == std::string::npos);
}

TEST_CASE("analyze writes deltas, groups, per-dataset deltas, and histograms") {
  TempDir dir;
  cmd_fixture(42, dir.path());
  auto cfg = config_for(dir.path(), ReportFormat::Csv);
  const auto files = cmd_analyze(cfg);
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  CHECK(names == std::vector<std::string>{"analyze_xdomain_logistic.csv", "analyze_xdomain_logistic_groups.csv",
                                          "analyze_xdomain_logistic_by_dataset.csv", "hist_sharp.csv",
                                          "hist_smooth.csv"});
  const auto deltas = read_file(files[0]);
  CHECK(deltas.find("sharp,1,2,-1,") != std::string::npos);
  CHECK(deltas.find("smooth,2,1,1,") != std::string::npos);
  const auto groups = read_file(files[1]);
  CHECK(groups.find("better,smooth,1,") != std::string::npos);
  CHECK(groups.find("worse,sharp,1,") != std::string::npos);
  CHECK(read_file(files[3]).rfind("bin_left,bin_right,count\n", 0) == 0);
}

TEST_CASE("analysis tables for identical reports have empty better and worse groups") {
  const auto corpus = make_rank_flip_fixture({42});
  const auto report = rank_report(run_protocol(corpus, {Regime::AucOnly, Method::None}));
  const auto t = analysis_tables(report, report, corpus, {"analyze", "auconly", "none"});
  REQUIRE(t.groups.rows.size() == 3);
  CHECK(t.groups.rows[0][2] == 0);
  CHECK(t.groups.rows[1][2] == 0);
  CHECK(t.groups.rows[2][2] == 2);
}

TEST_CASE("config errors") {
  TempDir dir;
  cmd_fixture(42, dir.path());
  auto cfg = config_for(dir.path());
  cfg.regimes = {Regime::InData};
  CHECK_THROWS_AS(cmd_calibrate(cfg), ConfigError);  // no seed
  cfg.regimes = {Regime::InDomain};
  CHECK_THROWS_AS(cmd_kappa(cfg), ConfigError);
  cfg.regimes = {};
  CHECK_THROWS_AS(cmd_calibrate(cfg), ConfigError);
  cfg.regimes = {Regime::XDomain};
  cfg.corpus_path = dir / "missing.csv";
  CHECK_THROWS_AS(cmd_auc(cfg), ConfigError);
  cfg = config_for(dir.path());
  cfg.indata_ratio = 1.5;
  CHECK_THROWS_AS(cmd_auc(cfg), ConfigError);
  CHECK_THROWS_AS(parse_report_format("pdf"), Error);
}

TEST_CASE("report formatting") {
  CHECK(format_x100(0.973) == "97.3");
  CHECK(format_x100(0.75) == "75.0");
  CHECK(format_x100(-0.0001) == "0.0");
  CHECK(format_x100(std::nan("")) == "n/a");
}

TEST_CASE("ranks are computed before rounding") {
  ProtocolRun run;
  run.spec = {Regime::AucOnly, Method::None};
  run.models = {"a", "b"};
  run.datasets = {"d"};
  EvalCell ca, cb;
  ca.model_id = "a";
  ca.dataset_id = cb.dataset_id = "d";
  cb.model_id = "b";
  ca.accuracy = 0.7141;
  cb.accuracy = 0.7139;
  run.cells = {ca, cb};
  run.means = {{"a", 0.7141, 0}, {"b", 0.7139, 0}};
  const auto md = render(grid_from_run(run, {"auc", "auconly", "none"}, "t"), ReportFormat::Markdown);
  CHECK(md.find("| d | 71.4 \\| 1 | 71.4 \\| 2 |") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  const auto d = dir.path().string();
  CHECK(run_cli("fixture --seed 42 --out " + d) == 0);
  CHECK(run_cli("auc --corpus " + d + "/corpus.csv --registry " + d + "/registry.csv --out " + d + "/o") == 0);
  CHECK(fs::exists(dir / "o/auc_auconly_none.md"));
  CHECK(run_cli("calibrate --corpus " + d + "/corpus.csv --registry " + d +
                "/registry.csv --regime xdomain,outdomain --method logistic --report-format json --out " + d + "/o") ==
        0);
  CHECK(fs::exists(dir / "o/calibrate_outdomain_logistic.json"));
  CHECK(run_cli("calibrate --corpus " + d + "/corpus.csv --registry " + d + "/registry.csv --regime indata --out " +
                d + "/o") == 2);
  CHECK(run_cli("auc --corpus " + d + "/nope.csv --registry " + d + "/registry.csv") == 2);
  CHECK(run_cli("auc --bogus-flag") == 2);
  CHECK(run_cli("calibrate --corpus " + d + "/corpus.csv --registry " + d + "/registry.csv --regime sideways") == 2);
  CHECK(run_cli("") == 2);

  write_file(dir / "bad.csv", "model,dataset,item,score,label\nm,d1,a,0.1,7\n");
  write_file(dir / "reg.csv", "dataset,domain\nd1,x\n");
  CHECK(run_cli("auc --corpus " + d + "/bad.csv --registry " + d + "/reg.csv --out " + d + "/o") == 1);
  write_file(dir / "unreg.csv", "model,dataset,item,score,label\nm,zz,a,0.1,1\n");
  CHECK(run_cli("auc --corpus " + d + "/unreg.csv --registry " + d + "/reg.csv --out " + d + "/o") == 1);
}
