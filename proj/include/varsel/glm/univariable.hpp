#pragma once

#include <span>
#include <vector>

#include "varsel/common/parallel.hpp"
#include "varsel/datagen/data_matrix.hpp"

namespace varsel::glm {

/// One-predictor GLM with intercept. Coefficients are per unit of x, which is
/// per SD for standardized covariates.
struct UnivariableResult {
  int variable = -1;
  double coefficient = 0.0;
  double std_error = 0.0;
  double p_value = 1.0;
  bool separated = false;  ///< binary only: x perfectly separates the classes
  int iterations = 0;      ///< IRLS iterations (binary)
};

inline constexpr int kIrlsMaxIterations = 50;
inline constexpr double kIrlsTolerance = 1e-8;

/// Continuous: least-squares slope with a t-test on n - 2 df. Binary: logistic
/// MLE by IRLS with a normal Wald test. Perfect separation returns an
/// infinite coefficient, p-value 0 and `separated` set; a constant predictor
/// returns p-value 1. Throws ConvergenceError when IRLS does not converge and
/// InvalidArgument for a single-class binary outcome.
UnivariableResult fit_univariable(std::span<const double> x,
                                  std::span<const double> y, Family family,
                                  int variable = -1);

/// fit_univariable for every column of X.
std::vector<UnivariableResult> fit_univariable_all(const Matrix& x,
                                                   const Vector& y,
                                                   Family family,
                                                   Exec exec = Exec::parallel);

/// Indices with p < alpha / p_total (strict). `p_total` defaults to the
/// number of results.
IndexSet bonferroni_select(std::span<const UnivariableResult> results,
                           double alpha = 0.05, int p_total = -1);

}  // namespace varsel::glm
