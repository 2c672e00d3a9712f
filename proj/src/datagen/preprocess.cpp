#include "varsel/datagen/preprocess.hpp"

#include <cmath>

#include "varsel/common/error.hpp"
#include "varsel/common/stats.hpp"

namespace varsel {

DataMatrix impute_median(const DataMatrix& m) {
  DataMatrix out = m;
  for (int j = 0; j < m.cols(); ++j) {
    if (!m.missing.col(j).any()) continue;
    std::vector<double> observed;
    observed.reserve(static_cast<std::size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) {
      if (!m.missing(i, j)) observed.push_back(m.values(i, j));
    }
    if (observed.empty()) {
      throw InvalidArgument("column '" + m.names[static_cast<std::size_t>(j)] +
                            "' has no observed values");
    }
    const double med = stats::median(std::move(observed));
    for (int i = 0; i < m.rows(); ++i) {
      if (m.missing(i, j)) {
        out.values(i, j) = med;
        out.missing(i, j) = false;
      }
    }
  }
  return out;
}

Standardized standardize(const DataMatrix& m) {
  if (m.has_missing()) {
    throw InvalidArgument("standardize requires a matrix without missing cells");
  }
  const auto n = static_cast<double>(m.rows());
  std::vector<int> kept;
  StandardizeReport report;
  for (int j = 0; j < m.cols(); ++j) {
    const double mu = m.values.col(j).mean();
    const double ss = (m.values.col(j).array() - mu).square().sum();
    const double sd = std::sqrt(ss / (n - 1.0));
    // Rounding noise on a constant column is ~1e-16 relative to its level.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mu)))) {
      report.dropped.push_back(m.names[static_cast<std::size_t>(j)]);
    } else {
      kept.push_back(j);
    }
  }

  Matrix values(m.rows(), static_cast<Eigen::Index>(kept.size()));
  std::vector<std::string> names;
  names.reserve(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const int j = kept[k];
    const double mu = m.values.col(j).mean();
    auto centered = (m.values.col(j).array() - mu).matrix().eval();
    const double sd = std::sqrt(centered.squaredNorm() / (n - 1.0));
    values.col(static_cast<Eigen::Index>(k)) = centered / sd;
    names.push_back(m.names[static_cast<std::size_t>(j)]);
  }
  return {DataMatrix(std::move(values), std::move(names)), std::move(report)};
}

Preprocessed preprocess(const DataMatrix& m) {
  PreprocessReport report;
  std::vector<int> observed_cols;
  for (int j = 0; j < m.cols(); ++j) {
    if (m.missing.col(j).all()) {
      report.all_missing.push_back(m.names[static_cast<std::size_t>(j)]);
    } else {
      observed_cols.push_back(j);
    }
  }
  std::vector<std::string> names;
  for (int j : observed_cols) names.push_back(m.names[static_cast<std::size_t>(j)]);
  DataMatrix usable(select_cols(m.values, observed_cols), std::move(names),
                    m.missing(Eigen::all, observed_cols));
  auto standardized = standardize(impute_median(usable));
  report.zero_variance = std::move(standardized.report.dropped);
  return {std::move(standardized.data), std::move(report)};
}

}  // namespace varsel
