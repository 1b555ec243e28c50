#include "calibench/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "calibench/errors.hpp"
#include "text_io.hpp"

namespace calibench {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Markers appended to a displayed score.
constexpr const char* kFallbackMarker = "***";
constexpr const char* kDegenerateMarker = "!";

std::string header_line(const ReportHeader& h) {
  std::ostringstream out;
  out << "command=" << h.command << " regime=" << h.regime << " method=" << h.method << " seed="
      << (h.seed ? std::to_string(*h.seed) : std::string("none")) << " reps=" << h.indata_reps
      << " ratio=" << detail::format_double(h.indata_ratio);
  return out.str();
}

json header_json(const ReportHeader& h) {
  json j = {{"command", h.command}, {"regime", h.regime}, {"method", h.method},
            {"indata_reps", h.indata_reps}, {"indata_ratio", h.indata_ratio}};
  j["seed"] = h.seed ? json(*h.seed) : json(nullptr);
  return j;
}

std::string markers(const GridCell& c) {
  std::string m;
  if (c.indata_fallback) m += kFallbackMarker;
  if (c.degenerate) m += kDegenerateMarker;
  return m;
}

std::string md_escape(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return detail::format_double(v.get<double>());
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "json") return ReportFormat::Json;
  throw Error(ErrorKind::InvalidSpec, "unknown report format '" + std::string(name) + "'");
}

const char* extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Markdown: return "md";
    case ReportFormat::Json: return "json";
  }
  return "txt";
}

std::string format_x100(double value) {
  if (!std::isfinite(value)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value * 100.0);
  // Avoid printing "-0.0".
  if (std::string(buf) == "-0.0") return "0.0";
  return buf;
}

ReportGrid grid_from_run(const ProtocolRun& run, ReportHeader header, std::string title, bool use_kappa) {
  ReportGrid grid;
  grid.header = std::move(header);
  grid.title = std::move(title);
  grid.metric = use_kappa ? "kappa" : run.metric_name();
  grid.columns = run.models;
  const auto report = rank_report(run, use_kappa);
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    grid.rows.push_back(row.label);
    std::vector<GridCell> cells;
    for (std::size_t m = 0; m < run.models.size(); ++m) {
      GridCell cell;
      if (const auto* c = run.find(run.models[m], row.label)) {
        cell.present = true;
        cell.value = row.values[m];
        cell.rank = row.ranks[m];
        cell.degenerate = c->degenerate;
        cell.indata_fallback = c->indata_fallback;
      }
      cells.push_back(cell);
    }
    grid.cells.push_back(std::move(cells));
  }
  grid.rows.push_back("mean");
  std::vector<GridCell> mean_cells;
  for (std::size_t m = 0; m < run.models.size(); ++m) {
    mean_cells.push_back({true, report.mean.values[m], report.mean.ranks[m], false, false});
  }
  grid.cells.push_back(std::move(mean_cells));
  return grid;
}

ReportGrid grid_from_best_kappa(const BestKappaRun& run, ReportHeader header, std::string title) {
  ReportGrid grid;
  grid.header = std::move(header);
  grid.title = std::move(title);
  grid.metric = "kappa";
  grid.columns = run.models;
  const auto report = rank_report(run);
  for (const auto& row : report.rows) {
    grid.rows.push_back(row.label);
    std::vector<GridCell> cells;
    for (std::size_t m = 0; m < run.models.size(); ++m) {
      GridCell cell;
      for (const auto& c : run.cells) {
        if (c.model_id != run.models[m] || c.dataset_id != row.label) continue;
        cell = {true, row.values[m], row.ranks[m], c.degenerate, c.indata_fallback};
      }
      cells.push_back(cell);
    }
    grid.cells.push_back(std::move(cells));
  }
  grid.rows.push_back("mean");
  std::vector<GridCell> mean_cells;
  for (std::size_t m = 0; m < run.models.size(); ++m) {
    mean_cells.push_back({true, report.mean.values[m], report.mean.ranks[m], false, false});
  }
  grid.cells.push_back(std::move(mean_cells));
  return grid;
}

void add_summary_row(ReportGrid& grid, const std::string& label, const std::vector<double>& model_values,
                     const std::vector<bool>& fallback) {
  if (model_values.size() != grid.columns.size()) {
    throw Error(ErrorKind::LengthMismatch, "summary row '" + label + "' width differs from model count");
  }
  const auto ranks = rank_models(model_values);
  std::vector<GridCell> cells;
  double sum = 0.0;
  int n = 0;
  for (std::size_t m = 0; m < model_values.size(); ++m) {
    cells.push_back({true, model_values[m], ranks[m], false, !fallback.empty() && fallback[m]});
    if (std::isfinite(model_values[m])) {
      sum += model_values[m];
      ++n;
    }
  }
  grid.rows.push_back(label);
  grid.cells.push_back(std::move(cells));
  grid.has_avg = true;
  grid.avg.resize(grid.rows.size() - 1, kNaN);
  grid.avg.push_back(n == 0 ? kNaN : sum / n);
}

json to_json(const ReportGrid& grid) {
  json j;
  j["header"] = header_json(grid.header);
  j["title"] = grid.title;
  j["metric"] = grid.metric;
  j["columns"] = grid.columns;
  json rows = json::array();
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    json cells = json::array();
    for (std::size_t m = 0; m < grid.columns.size(); ++m) {
      const auto& c = grid.cells[r][m];
      if (!c.present) {
        cells.push_back(nullptr);
        continue;
      }
      cells.push_back({{"model", grid.columns[m]},
                       {"value", c.value},
                       {"display", format_x100(c.value)},
                       {"rank", c.rank},
                       {"degenerate", c.degenerate},
                       {"indata_fallback", c.indata_fallback}});
    }
    json row = {{"label", grid.rows[r]}, {"cells", std::move(cells)}};
    if (grid.has_avg) row["avg"] = grid.avg[r];
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string render(const ReportGrid& grid, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json:
      out << to_json(grid).dump(2) << '\n';
      break;
    case ReportFormat::Csv:
      out << "# " << header_line(grid.header) << '\n';
      out << "model,dataset,metric,value,rank,degenerate,indata_fallback\n";
      for (std::size_t r = 0; r < grid.rows.size(); ++r) {
        for (std::size_t m = 0; m < grid.columns.size(); ++m) {
          const auto& c = grid.cells[r][m];
          if (!c.present) continue;
          out << detail::csv_escape(grid.columns[m]) << ',' << detail::csv_escape(grid.rows[r]) << ','
              << grid.metric << ',' << detail::format_double(c.value) << ',' << c.rank << ','
              << (c.degenerate ? 1 : 0) << ',' << (c.indata_fallback ? 1 : 0) << '\n';
        }
        if (grid.has_avg) {
          out << "AVG," << detail::csv_escape(grid.rows[r]) << ',' << grid.metric << ','
              << detail::format_double(grid.avg[r]) << ",0,0,0\n";
        }
      }
      break;
    case ReportFormat::Markdown: {
      out << "**" << grid.title << "**\n\n";
      out << "`" << header_line(grid.header) << "`\n\n";
      out << "| " << md_escape(grid.row_header);
      for (const auto& c : grid.columns) out << " | " << md_escape(c);
      if (grid.has_avg) out << " | AVG";
      out << " |\n|---";
      for (std::size_t m = 0; m < grid.columns.size(); ++m) out << "|---";
      if (grid.has_avg) out << "|---";
      out << "|\n";
      for (std::size_t r = 0; r < grid.rows.size(); ++r) {
        out << "| " << md_escape(grid.rows[r]);
        for (std::size_t m = 0; m < grid.columns.size(); ++m) {
          const auto& c = grid.cells[r][m];
          if (!c.present) {
            out << " | -";
          } else if (!std::isfinite(c.value)) {
            out << " | n/a" << markers(c);
          } else {
            out << " | " << format_x100(c.value) << markers(c) << " \\| " << c.rank;
          }
        }
        if (grid.has_avg) out << " | " << format_x100(grid.avg[r]);
        out << " |\n";
      }
      out << "\nValues x100. " << kFallbackMarker << ": calibrated in-data (dataset is alone in its domain). "
          << kDegenerateMarker << ": single-class or empty training data.\n";
      break;
    }
  }
  return out.str();
}

std::string render(const ReportTable& table, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json: {
      json j;
      j["header"] = header_json(table.header);
      j["title"] = table.title;
      j["columns"] = table.columns;
      json rows = json::array();
      for (const auto& row : table.rows) {
        json obj = json::object();
        for (std::size_t c = 0; c < table.columns.size(); ++c) obj[table.columns[c]] = row[c];
        rows.push_back(std::move(obj));
      }
      j["rows"] = std::move(rows);
      out << j.dump(2) << '\n';
      break;
    }
    case ReportFormat::Csv:
      out << "# " << header_line(table.header) << '\n';
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << detail::csv_escape(table.columns[c]);
      }
      out << '\n';
      for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << detail::csv_escape(scalar_text(row[c]));
        out << '\n';
      }
      break;
    case ReportFormat::Markdown:
      out << "**" << table.title << "**\n\n";
      out << "`" << header_line(table.header) << "`\n\n|";
      for (const auto& c : table.columns) out << ' ' << md_escape(c) << " |";
      out << "\n|";
      for (std::size_t c = 0; c < table.columns.size(); ++c) out << "---|";
      out << '\n';
      for (const auto& row : table.rows) {
        out << '|';
        for (const auto& v : row) out << ' ' << md_escape(scalar_text(v)) << " |";
        out << '\n';
      }
      break;
  }
  return out.str();
}

}  // namespace calibench
