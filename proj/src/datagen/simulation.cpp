#include "varsel/datagen/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varsel/common/error.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/common/stats.hpp"

namespace varsel {

std::vector<double> max_abs_offdiagonal(const Matrix& corr) {
  const auto p = corr.rows();
  std::vector<double> out(static_cast<std::size_t>(p), 0.0);
  for (Eigen::Index j = 0; j < p; ++j) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k != j) best = std::max(best, std::abs(corr(j, k)));
    }
    out[static_cast<std::size_t>(j)] = best;
  }
  return out;
}

TargetSelection select_target_variables(const Matrix& corr, std::uint64_t seed) {
  if (corr.rows() != corr.cols()) {
    throw InvalidArgument("correlation matrix must be square");
  }
  const auto max_abs = max_abs_offdiagonal(corr);
  TargetSelection sel;
  for (std::size_t j = 0; j < max_abs.size(); ++j) {
    if (max_abs[j] > kHighCollinearity) sel.high_pool.push_back(static_cast<int>(j));
    if (max_abs[j] < kLowCollinearity) sel.low_pool.push_back(static_cast<int>(j));
  }
  const auto high_n = static_cast<int>(sel.high_pool.size());
  const auto low_n = static_cast<int>(sel.low_pool.size());
  if (high_n < kTargetsPerPool || low_n < kTargetsPerPool) {
    throw InvalidArgument("target pools too small: high-collinearity pool has " +
                          std::to_string(high_n) + ", low-collinearity pool has " +
                          std::to_string(low_n) + " (need 5 each)");
  }
  auto rng = make_rng(seed, "select-targets");
  auto draw = [&](const std::vector<int>& pool) {
    auto picks = sample_without_replacement(static_cast<int>(pool.size()),
                                            kTargetsPerPool, rng);
    std::vector<int> chosen;
    for (int k : picks) chosen.push_back(pool[static_cast<std::size_t>(k)]);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  };
  auto high = draw(sel.high_pool);
  auto low = draw(sel.low_pool);
  sel.targets = high;
  sel.targets.insert(sel.targets.end(), low.begin(), low.end());
  return sel;
}

SimulationDesign SimulationDesign::make(std::vector<int> targets, int p,
                                        double effect, Family family,
                                        std::uint64_t seed) {
  SimulationDesign d;
  std::vector<bool> is_target(static_cast<std::size_t>(p), false);
  for (int t : targets) {
    if (t < 0 || t >= p) throw InvalidArgument("target index out of range");
    if (is_target[static_cast<std::size_t>(t)]) {
      throw InvalidArgument("duplicate target index " + std::to_string(t));
    }
    is_target[static_cast<std::size_t>(t)] = true;
  }
  for (int j = 0; j < p; ++j) {
    if (!is_target[static_cast<std::size_t>(j)]) d.nontargets.push_back(j);
  }
  d.targets = std::move(targets);
  d.effect = effect;
  d.family = family;
  d.seed = seed;
  return d;
}

double required_effect_size(double power, double alpha, int n, Family family) {
  if (!(power > 0.0 && power < 1.0)) throw InvalidArgument("power must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (n < 1) throw InvalidArgument("n must be positive");
  const double z_sum = stats::normal_quantile(1.0 - alpha / 2.0) +
                       stats::normal_quantile(power);
  // Fisher information per observation: 1 for a unit-variance residual,
  // p0 (1 - p0) = 1/4 for a logistic model at prevalence 0.5.
  const double info = family == Family::binary ? 0.25 : 1.0;
  return z_sum / std::sqrt(static_cast<double>(n) * info);
}

OutcomeVector simulate_outcomes(const Matrix& x_targets, const Vector& beta,
                                Family family, std::uint64_t seed) {
  if (x_targets.cols() != beta.size()) {
    throw InvalidArgument("simulate_outcomes: beta length does not match targets");
  }
  const Vector eta = x_targets * beta;
  auto rng = make_rng(seed, "outcomes");
  OutcomeVector out{Vector(eta.size()), family};
  if (family == Family::continuous) {
    std::normal_distribution<double> noise;
    for (Eigen::Index i = 0; i < eta.size(); ++i) out.y(i) = eta(i) + noise(rng);
  } else {
    std::uniform_real_distribution<double> unif;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      out.y(i) = unif(rng) < stats::expit(eta(i)) ? 1.0 : 0.0;
    }
  }
  return out;
}

SplitAssignment split_discovery_validation(int n, double fraction,
                                           std::uint64_t seed) {
  if (n < 3) throw InvalidArgument("split needs n >= 3");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidArgument("split fraction must lie in (0, 1)");
  }
  const auto k = static_cast<int>(std::lround(fraction * n));
  auto rng = make_rng(seed, "split");
  auto perm = random_permutation(n, rng);
  SplitAssignment s;
  s.discovery.assign(perm.begin(), perm.begin() + k);
  s.validation.assign(perm.begin() + k, perm.end());
  std::sort(s.discovery.begin(), s.discovery.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

}  // namespace varsel
