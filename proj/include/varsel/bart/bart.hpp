#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "varsel/common/parallel.hpp"
#include "varsel/datagen/data_matrix.hpp"

namespace varsel::bart {

struct BartParams {
  int trees = 50;
  int burn_in = 1000;
  int kept = 1000;
  double tree_alpha = 0.95;  ///< P(node at depth d splits) = tree_alpha (1 + d)^-tree_beta
  double tree_beta = 2.0;
  double leaf_k = 2.0;       ///< leaf prior SD = half-range / (leaf_k sqrt(trees))
  double sigma_nu = 3.0;     ///< sigma^2 ~ nu * lambda / chi^2_nu
  double sigma_q = 0.9;      ///< P(sigma < sigma_hat) under the prior
  std::uint64_t seed = 0;
  bool store_trees = true;   ///< keep every sampled ensemble for predict()
  /// Diagnostic: drop the likelihood from the tree proposals so the chain
  /// samples the tree prior.
  bool prior_only = false;
};

/// Compact tree for prediction; a leaf has variable == -1 and rows with
/// x <= cut go left.
struct FlatNode {
  int variable = -1;
  double cut = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};
using FlatTree = std::vector<FlatNode>;

struct BartPosterior {
  Family family = Family::continuous;
  BartParams params;
  int n = 0;
  int p = 0;
  /// Continuous outcomes are fitted as (y - y_min) / y_range - 0.5.
  double y_min = 0.0;
  double y_range = 1.0;
  double sigma_hat = 0.0;        ///< data-based sigma used to calibrate the prior (fit scale)
  std::vector<double> sigma;     ///< kept sigma draws on the outcome scale (continuous only)
  std::vector<double> split_counts;  ///< per variable, pooled over kept samples
  double total_splits = 0.0;
  Vector train_mean;             ///< posterior mean prediction on the training rows
  std::vector<std::vector<FlatTree>> ensembles;  ///< kept samples (if stored)
  int grow_accepted = 0;
  int prune_accepted = 0;
  int change_accepted = 0;

  /// Posterior mean of E[y | x] (continuous) or P(y = 1 | x) (binary).
  /// Throws InvalidArgument if the ensembles were not stored.
  [[nodiscard]] Vector predict(const Matrix& x) const;
};

/// Backfitting MCMC with grow / prune / change proposals (probabilities
/// 2.5/9, 2.5/9, 4/9), conjugate leaf means and an inverse chi-square draw
/// for sigma. Binary outcomes use probit latent-normal augmentation.
/// Throws InvalidArgument for bad shapes or settings, NumericalError when a
/// leaf draw is not finite.
BartPosterior fit_bart(const Matrix& x, const Vector& y, Family family,
                       const BartParams& params = {});

struct InclusionProportions {
  Vector values;              ///< per variable, sums to 1
  bool uniform_fallback = false;  ///< no split in any kept sample; values = 1/p
};

/// Splits on each variable over all splits, pooled across kept samples.
InclusionProportions inclusion_proportions(const BartPosterior& post);

/// Row i holds the inclusion proportions of a fit to (X, permutation_i(y)).
/// Permutations and fits use streams derived from (seed, i). Throws
/// InvalidArgument for fewer than 50 permutations unless `allow_small` is set.
Matrix permutation_null(const Matrix& x, const Vector& y, Family family,
                        const BartParams& params, int permutations,
                        std::uint64_t seed, Exec exec = Exec::parallel,
                        bool allow_small = false);

/// Per-variable empirical (1 - alpha) quantile of the null column.
Vector local_thresholds(const Matrix& null, double alpha = 0.05);

/// Smallest C such that in at least ceil((1 - alpha) P) null rows every
/// variable satisfies null_ij <= mean_j + C sd_j.
double global_se_multiplier(const Matrix& null, double alpha = 0.05);

/// Empirical (1 - alpha) quantile of the per-row maxima.
double global_max_threshold(const Matrix& null, double alpha = 0.05);

IndexSet select_local(const Vector& ip, const Matrix& null, double alpha = 0.05);
IndexSet select_global_se(const Vector& ip, const Matrix& null, double alpha = 0.05);
IndexSet select_global_max(const Vector& ip, const Matrix& null, double alpha = 0.05);

/// One row per variable: proportion, null mean / SD and the three thresholds.
void write_inclusion_csv(const std::filesystem::path& path, const Vector& ip,
                         const Matrix& null, const std::vector<std::string>& names,
                         double alpha = 0.05);

/// The null matrix, one row per permutation, variables as columns.
void write_null_csv(const std::filesystem::path& path, const Matrix& null,
                    const std::vector<std::string>& names);

}  // namespace varsel::bart
