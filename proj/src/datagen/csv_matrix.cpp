#include "varsel/datagen/csv_matrix.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "varsel/common/csv.hpp"
#include "varsel/common/error.hpp"

namespace varsel {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_number(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

DataMatrix load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + ": missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Drop a UTF-8 byte-order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  std::vector<std::string> names;
  for (auto& field : csv::split_record(line)) names.emplace_back(trim(field));
  const auto p = names.size();

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> masks;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split_record(line);
    if (fields.size() != p) {
      throw ParseError(path.string() + ": row " + std::to_string(line_no) +
                       " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(p));
    }
    std::vector<double> row(p);
    std::vector<bool> mask(p, false);
    for (std::size_t j = 0; j < p; ++j) {
      const auto cell = trim(fields[j]);
      if (cell.empty()) {
        row[j] = std::numeric_limits<double>::quiet_NaN();
        mask[j] = true;
      } else if (!parse_number(cell, row[j])) {
        throw ParseError(path.string() + ": non-numeric cell at row " +
                         std::to_string(line_no) + ", column " +
                         std::to_string(j + 1) + " ('" + std::string(cell) +
                         "')");
      }
    }
    rows.push_back(std::move(row));
    masks.push_back(std::move(mask));
  }

  Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  BoolMatrix missing(values.rows(), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      missing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = masks[i][j];
    }
  }
  DataMatrix m(std::move(values), std::move(names), std::move(missing));
  m.validate();
  return m;
}

void write_csv_matrix(const std::filesystem::path& path, const DataMatrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << csv::join_record(m.names) << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      if (!m.missing(i, j)) out << csv::format_double(m.values(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace varsel
