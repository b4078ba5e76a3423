#pragma once

#include <string>
#include <variant>
#include <vector>

#include "dsdr/dataset.hpp"
#include "dsdr/metrics.hpp"

namespace dsdr {

// Response column selector: header name, or 0-based index.
using ColumnRef = std::variant<std::string, int>;

struct CsvData {
  Dataset data;
  std::vector<std::string> predictor_names;
  std::string response_name;
};

// Rectangular numeric CSV with a header row. Remaining columns become
// predictors in file order; standardize z-scores each predictor column.
CsvData load_csv(const std::string& path, const ColumnRef& response, bool standardize);

// Raw cell grid of a CSV file (used by round-trip checks and table readers).
std::vector<std::vector<std::string>> read_csv_cells(const std::string& path);

// Formats a double with 17 significant digits (round-trippable).
std::string format_real(double v);

struct ResultTable {
  std::vector<std::string> config_names;   // echo columns
  std::vector<std::string> config_values;
  std::vector<MetricRecord> records;
  int max_r2_columns = 0;
};

// Fixed column order: config echo, rep, trace_correlation, r_squared,
// wall_time_seconds, bytes_up, bytes_down, error_flag, then per-column
// r_squared extras. Aggregate rows carry rep = "mean"/"std" and the count of
// successful repetitions in error_flag.
void write_result_table(const ResultTable& table, const std::string& path);

}  // namespace dsdr
