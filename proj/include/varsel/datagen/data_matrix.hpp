#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace varsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Sorted, duplicate-free list of column (variable) indices.
using IndexSet = std::vector<int>;

enum class Family { continuous, binary };

std::string_view to_string(Family family);
Family parse_family(std::string_view text);

/// n x p covariate matrix. Missing cells hold NaN in `values` and are flagged
/// in `missing`.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> names;
  BoolMatrix missing;

  DataMatrix() = default;
  DataMatrix(Matrix v, std::vector<std::string> column_names);
  DataMatrix(Matrix v, std::vector<std::string> column_names, BoolMatrix mask);

  [[nodiscard]] int rows() const { return static_cast<int>(values.rows()); }
  [[nodiscard]] int cols() const { return static_cast<int>(values.cols()); }
  [[nodiscard]] bool has_missing() const { return missing.any(); }

  /// Throws InvalidArgument unless n >= 2, p >= 1, the mask matches the
  /// values and column names are unique.
  void validate() const;
};

/// Default column names V001..Vp, zero-padded to the width of p.
std::vector<std::string> default_column_names(int p);

Matrix select_rows(const Matrix& m, const std::vector<int>& rows);
Matrix select_cols(const Matrix& m, const std::vector<int>& cols);
Vector select_entries(const Vector& v, const std::vector<int>& idx);

}  // namespace varsel
