#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "varsel/cluster/cluster.hpp"
#include "varsel/glm/elastic_net.hpp"

namespace varsel::sgl {

/// Sparse group lasso penalty:
///   (1 - mixing) * lambda * sum_g w_g ||b_g||_2 + mixing * lambda * ||b||_1
struct GroupedPenaltySpec {
  cluster::ClusterAssignment groups;
  double mixing = 0.95;        ///< within-group L1 share
  std::vector<double> weights;  ///< per group; empty means sqrt(group size)

  /// Throws InvalidArgument unless the groups partition 0..p-1 and all
  /// weights are positive.
  void validate(int p) const;
  [[nodiscard]] std::vector<double> resolved_weights() const;
};

/// Every variable in its own group.
cluster::ClusterAssignment singleton_groups(int p);

struct SglOptions {
  int n_lambda = 100;
  double min_ratio = -1.0;     ///< < 0: 1e-4 when n > p, else 1e-2
  std::vector<double> lambda;  ///< explicit decreasing grid
  double tolerance = 1e-7;     ///< max coefficient change per block sweep
  double inner_tolerance = 1e-6;  ///< subgradient residual of a group subproblem
  int max_sweeps = 10000;      ///< block sweeps per grid value
  int max_inner_iterations = 10000;
  /// Called after every block sweep with (grid index, value of the penalized
  /// quadratic being minimized). Diagnostic hook.
  std::function<void(int, double)> sweep_observer;
};

/// Smallest lambda at which every group is zero at the null model.
double sgl_lambda_max(const Matrix& x, const Vector& y, const GroupedPenaltySpec& spec);

/// Path of the objective (1/2n) loss + penalty, loss = RSS (continuous) or
/// binomial deviance, by blockwise descent with warm starts. Binary outcomes
/// use IRLS outer steps (weights floored at 1e-5). The returned fit's `alpha`
/// field holds the within-group mixing. Throws ConvergenceError with the
/// grid value and last change when a grid point exhausts max_sweeps.
glm::PenalizedFit fit_sparse_group_lasso(const Matrix& x, const Vector& y,
                                         Family family,
                                         const GroupedPenaltySpec& spec,
                                         const SglOptions& options = {});

/// k-fold CV on the full-data grid, same loss and summaries as the
/// elastic-net CV.
glm::PenalizedFit sgl_cross_validate(const Matrix& x, const Vector& y,
                                     Family family,
                                     const GroupedPenaltySpec& spec,
                                     const glm::Folds& folds,
                                     const SglOptions& options = {},
                                     Exec exec = Exec::parallel);

/// Nonzero coefficients at the CV minimum.
IndexSet sgl_selected_variables(const glm::PenalizedFit& fit);

}  // namespace varsel::sgl
