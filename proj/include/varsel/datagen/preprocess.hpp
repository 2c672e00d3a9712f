#pragma once

#include <string>
#include <vector>

#include "varsel/datagen/data_matrix.hpp"

namespace varsel {

/// Replaces each missing cell with the median of the observed values in its
/// column. Throws InvalidArgument naming the column when a column has no
/// observed values.
DataMatrix impute_median(const DataMatrix& m);

struct StandardizeReport {
  std::vector<std::string> dropped;  ///< zero-variance columns, in input order
};

struct Standardized {
  DataMatrix data;
  StandardizeReport report;
};

/// Centers every column to mean 0 and scales it to sample SD 1 (divisor
/// n - 1). Constant columns are dropped and listed in the report.
/// Requires a matrix without missing cells.
Standardized standardize(const DataMatrix& m);

struct PreprocessReport {
  std::vector<std::string> all_missing;    ///< dropped before imputation
  std::vector<std::string> zero_variance;  ///< dropped by standardization
};

struct Preprocessed {
  DataMatrix data;
  PreprocessReport report;
};

/// Full pipeline: drop columns with no observed values, impute medians, then
/// standardize.
Preprocessed preprocess(const DataMatrix& m);

}  // namespace varsel
