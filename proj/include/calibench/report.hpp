#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "calibench/analysis.hpp"
#include "calibench/protocols.hpp"

namespace calibench {

enum class ReportFormat { Csv, Markdown, Json };

ReportFormat parse_report_format(std::string_view name);
const char* extension(ReportFormat format);

// Run parameters stamped on every report so each cell can be replayed.
struct ReportHeader {
  std::string command;
  std::string regime;
  std::string method;
  std::optional<std::uint64_t> seed;
  int indata_reps = 100;
  double indata_ratio = 0.8;
};

struct GridCell {
  bool present = false;
  double value = 0.0;  // raw, unscaled
  int rank = 0;        // computed on raw values
  bool degenerate = false;
  bool indata_fallback = false;
};

// A table of "score | rank" cells: columns are models, rows are datasets
// (plus a mean row) or regime/method combinations.
struct ReportGrid {
  ReportHeader header;
  std::string title;
  std::string row_header = "data set";
  std::string metric;
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<GridCell>> cells;
  // Optional trailing AVG column: per-row mean over the present cells.
  bool has_avg = false;
  std::vector<double> avg;
};

ReportGrid grid_from_run(const ProtocolRun& run, ReportHeader header, std::string title, bool use_kappa = false);
ReportGrid grid_from_best_kappa(const BestKappaRun& run, ReportHeader header, std::string title);

// Appends one row with each model's mean value and its rank.
void add_summary_row(ReportGrid& grid, const std::string& label, const std::vector<double>& model_values,
                     const std::vector<bool>& fallback = {});

// Plain table for non-grid outputs; cells hold JSON scalars.
struct ReportTable {
  ReportHeader header;
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

// Value x 100 with one decimal, "n/a" for NaN.
std::string format_x100(double value);

std::string render(const ReportGrid& grid, ReportFormat format);
std::string render(const ReportTable& table, ReportFormat format);
nlohmann::json to_json(const ReportGrid& grid);

}  // namespace calibench
