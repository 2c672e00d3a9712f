#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace varsel::stats {

double normal_cdf(double z);
double normal_quantile(double p);

/// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);

/// Two-sided p-value of a Student-t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

inline double expit(double eta) {
  // Split on sign so neither branch overflows.
  if (eta >= 0) {
    const double e = std::exp(-eta);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double mean(std::span<const double> x);

/// Sample standard deviation with divisor n - 1.
double sample_sd(std::span<const double> x);

/// Empirical quantile, linear interpolation between order statistics
/// (the "type 7" convention). `prob` in [0, 1].
double quantile(std::vector<double> x, double prob);

/// Median of a non-empty sample; even counts average the middle pair.
double median(std::vector<double> x);

/// Average ranks (1-based), ties get the mean of the ranks they span.
std::vector<double> mid_ranks(std::span<const double> x);

}  // namespace varsel::stats
