#include "dsdr/csvio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsdr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = 0;
    while (start < cell.size() && cell[start] == ' ') ++start;
    cells.push_back(cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  if (cell.empty()) throw NonNumericCell("empty cell", row, col);
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw NonNumericCell("non-numeric cell '" + cell + "'", row, col);
  return value;
}

}  // namespace

std::vector<std::vector<std::string>> read_csv_cells(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_line(line));
  }
  return rows;
}

CsvData load_csv(const std::string& path, const ColumnRef& response, bool standardize) {
  auto rows = read_csv_cells(path);
  if (rows.empty()) throw ParseError("empty file", 0, 0);
  const auto& header = rows.front();
  const std::size_t cols = header.size();
  if (cols < 2) throw ParseError("need a response column and at least one predictor", 0, 0);

  std::size_t response_idx = cols;
  if (std::holds_alternative<std::string>(response)) {
    const auto& name = std::get<std::string>(response);
    for (std::size_t j = 0; j < cols; ++j)
      if (header[j] == name) {
        response_idx = j;
        break;
      }
    if (response_idx == cols) throw MissingColumn("no column named '" + name + "'");
  } else {
    const int idx = std::get<int>(response);
    if (idx < 0 || static_cast<std::size_t>(idx) >= cols)
      throw MissingColumn("response index " + std::to_string(idx) + " out of range");
    response_idx = static_cast<std::size_t>(idx);
  }

  const std::size_t n = rows.size() - 1;
  if (n < 1) throw ParseError("no data rows", 1, 0);
  const auto p = static_cast<Eigen::Index>(cols - 1);

  CsvData out;
  out.response_name = header[response_idx];
  for (std::size_t j = 0; j < cols; ++j)
    if (j != response_idx) out.predictor_names.push_back(header[j]);

  out.data.x.resize(static_cast<Eigen::Index>(n), p);
  out.data.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != cols)
      throw ParseError("row has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(cols),
                       i + 1, row.size());
    Eigen::Index jx = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = parse_cell(row[j], i + 1, j);
      if (j == response_idx)
        out.data.y(static_cast<Eigen::Index>(i)) = v;
      else
        out.data.x(static_cast<Eigen::Index>(i), jx++) = v;
    }
  }

  if (standardize) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mean = out.data.x.col(j).mean();
      out.data.x.col(j).array() -= mean;
      if (n > 1) {
        const double sd = std::sqrt(out.data.x.col(j).squaredNorm() / static_cast<double>(n - 1));
        if (sd > 0.0) out.data.x.col(j) /= sd;
      }
    }
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_result_table(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);

  for (const auto& name : table.config_names) out << name << ',';
  out << "rep,trace_correlation,r_squared,wall_time_seconds,bytes_up,bytes_down,error_flag";
  for (int c = 0; c < table.max_r2_columns; ++c) out << ",r_squared_c" << (c + 1);
  out << '\n';

  auto write_config = [&] {
    for (const auto& value : table.config_values) out << value << ',';
  };

  for (const auto& r : table.records) {
    write_config();
    out << r.repetition << ',';
    if (r.failed) {
      out << ",,," << r.bytes_up << ',' << r.bytes_down << ",1";
      for (int c = 0; c < table.max_r2_columns; ++c) out << ',';
    } else {
      out << format_real(r.trace_correlation) << ',' << format_real(r.r_squared) << ','
          << format_real(r.wall_time_seconds) << ',' << r.bytes_up << ',' << r.bytes_down << ",0";
      for (int c = 0; c < table.max_r2_columns; ++c) {
        out << ',';
        if (c < static_cast<int>(r.r_squared_columns.size()))
          out << format_real(r.r_squared_columns[static_cast<std::size_t>(c)]);
      }
    }
    out << '\n';
  }

  bool enough = false;
  MetricSummary s;
  try {
    s = aggregate(table.records);
    enough = true;
  } catch (const InsufficientRepetitions&) {
  }
  if (enough) {
    write_config();
    out << "mean," << format_real(s.trace_correlation_mean) << ','
        << format_real(s.r_squared_mean) << ',' << format_real(s.wall_time_mean) << ','
        << format_real(s.bytes_up_mean) << ',' << format_real(s.bytes_down_mean) << ','
        << s.count;
    for (int c = 0; c < table.max_r2_columns; ++c) out << ',';
    out << '\n';
    write_config();
    out << "std," << format_real(s.trace_correlation_std) << ',' << format_real(s.r_squared_std)
        << ',' << format_real(s.wall_time_std) << ',' << format_real(s.bytes_up_std) << ','
        << format_real(s.bytes_down_std) << ',' << s.count;
    for (int c = 0; c < table.max_r2_columns; ++c) out << ',';
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace dsdr
