#include "varsel/datagen/data_matrix.hpp"

#include <unordered_set>

#include "varsel/common/error.hpp"

namespace varsel {

std::string_view to_string(Family family) {
  return family == Family::binary ? "binary" : "continuous";
}

Family parse_family(std::string_view text) {
  if (text == "binary") return Family::binary;
  if (text == "continuous") return Family::continuous;
  throw InvalidArgument("unknown outcome family '" + std::string(text) +
                        "' (expected binary or continuous)");
}

DataMatrix::DataMatrix(Matrix v, std::vector<std::string> column_names)
    : values(std::move(v)),
      names(std::move(column_names)),
      missing(BoolMatrix::Constant(values.rows(), values.cols(), false)) {}

DataMatrix::DataMatrix(Matrix v, std::vector<std::string> column_names,
                       BoolMatrix mask)
    : values(std::move(v)), names(std::move(column_names)),
      missing(std::move(mask)) {}

void DataMatrix::validate() const {
  if (rows() < 2) throw InvalidArgument("data matrix needs at least 2 rows");
  if (cols() < 1) throw InvalidArgument("data matrix needs at least 1 column");
  if (static_cast<int>(names.size()) != cols()) {
    throw InvalidArgument("column name count does not match column count");
  }
  if (missing.rows() != values.rows() || missing.cols() != values.cols()) {
    throw InvalidArgument("missing mask shape does not match values");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) {
      throw InvalidArgument("duplicate column name '" + name + "'");
    }
  }
}

std::vector<std::string> default_column_names(int p) {
  const auto width = std::to_string(p).size();
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (int j = 1; j <= p; ++j) {
    auto digits = std::to_string(j);
    names.push_back("V" + std::string(width - digits.size(), '0') + digits);
  }
  return names;
}

Matrix select_rows(const Matrix& m, const std::vector<int>& rows) {
  return m(rows, Eigen::all);
}

Matrix select_cols(const Matrix& m, const std::vector<int>& cols) {
  return m(Eigen::all, cols);
}

Vector select_entries(const Vector& v, const std::vector<int>& idx) {
  return v(idx);
}

}  // namespace varsel
