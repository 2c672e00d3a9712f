#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "varsel/common/parallel.hpp"
#include "varsel/datagen/data_matrix.hpp"

namespace varsel::glm {

/// Path settings. The default grid is 100 log-spaced values from lambda_max
/// down to 1e-4 * lambda_max (1e-2 when n <= p).
struct PathOptions {
  int n_lambda = 100;
  double min_ratio = -1.0;      ///< < 0 selects the n/p-dependent default
  std::vector<double> lambda;   ///< explicit decreasing grid, overrides the above
  double tolerance = 1e-7;      ///< max coefficient change per sweep
  int max_sweeps = 100000;      ///< per grid point, summed over IRLS steps
  /// Called after every coordinate sweep with (grid index, value of the
  /// penalized quadratic being minimized). Diagnostic hook; leave empty in
  /// production runs.
  std::function<void(int, double)> sweep_observer;
};

/// Elastic-net coefficient path. Objective, for a grid value lambda:
///   (1/2n) deviance + lambda * ((1 - alpha)/2 ||b||^2 + alpha ||b||_1)
/// with an unpenalized intercept (deviance = RSS for the Gaussian family).
struct PenalizedFit {
  Family family = Family::continuous;
  double alpha = 1.0;
  std::vector<double> lambda;  ///< decreasing
  Matrix coefficients;         ///< p x |lambda|
  Vector intercepts;           ///< |lambda|
  int solved = 0;  ///< grid points solved before a saturated-path stop

  // Cross-validation summary; empty / -1 for a plain path fit.
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  int index_min = -1;
  int index_1se = -1;

  [[nodiscard]] double lambda_min() const;
  [[nodiscard]] double lambda_1se() const;
  [[nodiscard]] bool has_cv() const { return index_min >= 0; }
};

/// Smallest lambda at which every coefficient is zero:
/// max_j |x_j' (y - ybar)| / (n * alpha), alpha floored at 1e-3.
double lambda_max(const Matrix& x, const Vector& y, double alpha);

std::vector<double> lambda_grid(double lambda_max, int count, double min_ratio);

/// Cyclic coordinate descent with warm starts, strong-rule screening and a
/// final KKT pass at every grid value. Binary outcomes use IRLS outer steps.
/// Throws InvalidArgument for alpha outside [0, 1], a non-positive grid value
/// or non-finite data; ConvergenceError if a grid point exhausts max_sweeps.
PenalizedFit fit_elastic_net_path(const Matrix& x, const Vector& y,
                                  Family family, double alpha,
                                  const PathOptions& options = {});

/// Fold label (0..k-1) per row.
struct Folds {
  std::vector<int> fold_of_row;
  int count = 0;
};

/// Balanced random fold assignment. For binary outcomes, when any held-out
/// fold or training set lacks a class the assignment is redrawn stratified by
/// class. Throws InvalidArgument for k < 3 or k > n.
Folds make_folds(const Vector& y, Family family, int k, std::uint64_t seed);

/// k-fold CV over the full-data grid. Held-out loss is mean deviance
/// (binary) or MSE (continuous); cv_se = SD over folds / sqrt(k).
/// lambda_min = argmin, lambda_1se = largest lambda within one SE of it.
PenalizedFit cross_validate(const Matrix& x, const Vector& y, Family family,
                            double alpha, const Folds& folds,
                            const PathOptions& options = {},
                            Exec exec = Exec::parallel);

PenalizedFit cross_validate(const Matrix& x, const Vector& y, Family family,
                            double alpha, int folds, std::uint64_t seed,
                            const PathOptions& options = {},
                            Exec exec = Exec::parallel);

/// Held-out loss vector over a fitted path, one entry per grid value.
std::vector<double> holdout_loss(const PenalizedFit& path, const Matrix& x,
                                 const Vector& y);

/// Summarises per-fold losses (folds x grid) into fit.cv_* and the two
/// selected indices.
void summarize_cv(const std::vector<std::vector<double>>& fold_losses,
                  PenalizedFit& fit);

struct AlphaSearch {
  double best_alpha = 1.0;
  PenalizedFit fit;                       ///< CV fit at the winning alpha
  std::vector<double> alphas;
  std::vector<double> best_cv_per_alpha;  ///< min CV error at each alpha
};

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_alpha_grid();

/// Cross-validates every alpha on one shared fold assignment and keeps the
/// (alpha, lambda) pair with the smallest CV error; ties go to the larger
/// lambda, then the smaller alpha.
AlphaSearch grid_search_alpha(const Matrix& x, const Vector& y, Family family,
                              const std::vector<double>& alphas,
                              const Folds& folds,
                              const PathOptions& options = {},
                              Exec exec = Exec::parallel);

enum class LambdaRule { min, one_se };

/// Variables with a nonzero coefficient at grid index `index`.
IndexSet nonzero_at(const PenalizedFit& fit, int index);

/// Variables with a nonzero coefficient at the CV-chosen lambda.
IndexSet selected_variables(const PenalizedFit& fit, LambdaRule rule);

/// Rows are variables, columns the lambda grid (header carries the values).
void write_path_csv(const std::filesystem::path& path, const PenalizedFit& fit,
                    const std::vector<std::string>& names);

}  // namespace varsel::glm
