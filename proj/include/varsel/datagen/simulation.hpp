#pragma once

#include <cstdint>
#include <vector>

#include "varsel/datagen/data_matrix.hpp"

namespace varsel {

/// Collinearity cut-offs that define the two target pools.
inline constexpr double kHighCollinearity = 0.95;
inline constexpr double kLowCollinearity = 0.6;
inline constexpr int kTargetsPerPool = 5;

struct TargetSelection {
  std::vector<int> high_pool;  ///< max |rho| with another column > 0.95
  std::vector<int> low_pool;   ///< max |rho| with every other column < 0.6
  std::vector<int> targets;    ///< 5 high-pool then 5 low-pool, each sorted
};

/// Largest absolute off-diagonal entry of each row of a correlation matrix.
std::vector<double> max_abs_offdiagonal(const Matrix& corr);

/// Draws 5 targets uniformly from each pool. Throws InvalidArgument reporting
/// both pool sizes when either has fewer than 5 members.
TargetSelection select_target_variables(const Matrix& corr, std::uint64_t seed);

/// The true data-generating model: which columns drive the outcome and by how
/// much (per SD of the covariate on the linear-predictor scale).
struct SimulationDesign {
  std::vector<int> targets;
  std::vector<int> nontargets;
  double effect = 0.0;
  Family family = Family::continuous;
  std::uint64_t seed = 0;

  /// Fills `nontargets` as the complement of `targets` in 0..p-1.
  static SimulationDesign make(std::vector<int> targets, int p, double effect,
                               Family family, std::uint64_t seed);
};

/// Smallest per-SD effect with the requested power for a single two-sided
/// univariable Wald test at level `alpha` with n observations. Binary outcomes
/// use baseline prevalence 0.5.
double required_effect_size(double power, double alpha, int n, Family family);

struct OutcomeVector {
  Vector y;
  Family family = Family::continuous;
};

/// Continuous: y = X_T beta + N(0, 1) noise. Binary: y ~ Bernoulli(expit(X_T
/// beta)) with zero intercept.
OutcomeVector simulate_outcomes(const Matrix& x_targets, const Vector& beta,
                                Family family, std::uint64_t seed);

struct SplitAssignment {
  std::vector<int> discovery;   ///< sorted
  std::vector<int> validation;  ///< sorted
};

/// Uniform random partition with round(fraction * n) discovery rows.
SplitAssignment split_discovery_validation(int n, double fraction,
                                           std::uint64_t seed);

}  // namespace varsel
