#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "varsel/datagen/data_matrix.hpp"

namespace varsel {

/// Marginal distribution a latent standard-normal column is mapped through.
struct Marginal {
  enum class Kind { normal, lognormal, zero_inflated };
  Kind kind = Kind::normal;
  double zero_probability = 0.0;  ///< zero_inflated only, in [0, 1)
  double log_sd = 1.0;            ///< lognormal / zero_inflated scale

  static Marginal normal() { return {}; }
  static Marginal lognormal(double log_sd = 1.0) {
    return {Kind::lognormal, 0.0, log_sd};
  }
  static Marginal zero_inflated(double pi, double log_sd = 1.0) {
    return {Kind::zero_inflated, pi, log_sd};
  }

  /// Maps a latent standard-normal draw onto this marginal. Monotone
  /// non-decreasing in z, so rank correlations are preserved.
  [[nodiscard]] double transform(double z) const;
};

/// A run of consecutive columns sharing one exchangeable latent correlation.
struct CorrelationBlock {
  int size = 1;
  double correlation = 0.0;  ///< in [0, 1)
};

/// Gaussian-copula description of a census-like covariate matrix. Blocks
/// occupy columns 0.. in order; remaining columns are independent.
struct SyntheticDesign {
  int p = 0;
  int n = 0;
  std::vector<CorrelationBlock> blocks;
  std::vector<Marginal> marginals;  ///< one per column; empty means all normal
  std::vector<int> negated;         ///< columns whose latent sign is flipped
  double missing_fraction = 0.0;    ///< MCAR cell-missingness rate in [0, 1)
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on any violated constraint.
  void validate() const;
};

DataMatrix generate_synthetic_covariates(const SyntheticDesign& design);

/// Parses the JSON form. `marginals` may be a single tag, an array of p tags,
/// or {"mix": {tag: weight, ...}, "zero_probability": .., "log_sd": ..}
/// which assigns tags to columns at random (stream derived from `seed`).
SyntheticDesign synthetic_design_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SyntheticDesign& design);

}  // namespace varsel
