#include "varsel/bench/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "varsel/common/error.hpp"

namespace varsel::bench {

double f2_score(double tp, double fn, double fp) {
  for (double v : {tp, fn, fp}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("f2_score: counts must be finite and non-negative");
    }
  }
  const double denom = 5.0 * tp + 4.0 * fn + fp;
  return denom == 0.0 ? 0.0 : 5.0 * tp / denom;
}

IndexSet surrogate_pool(const std::vector<int>& targets, const Matrix& corr,
                        double threshold) {
  std::vector<char> is_target(static_cast<std::size_t>(corr.cols()), 0);
  for (int t : targets) is_target[static_cast<std::size_t>(t)] = 1;
  IndexSet pool;
  for (int j = 0; j < corr.cols(); ++j) {
    if (is_target[static_cast<std::size_t>(j)]) continue;
    const bool linked = std::any_of(targets.begin(), targets.end(),
                                    [&](int t) { return std::abs(corr(j, t)) > threshold; });
    if (linked) pool.push_back(j);
  }
  return pool;
}

ScoreCard score_selection(const IndexSet& validated, const std::vector<int>& targets,
                          const Matrix& corr, double threshold) {
  if (corr.rows() != corr.cols()) throw InvalidArgument("correlation matrix is not square");
  const auto p = static_cast<int>(corr.cols());
  for (int v : validated) {
    if (v < 0 || v >= p) throw InvalidArgument("validated index out of range");
  }
  for (int t : targets) {
    if (t < 0 || t >= p) throw InvalidArgument("target index out of range");
  }
  const auto is_target = [&](int v) {
    return std::find(targets.begin(), targets.end(), v) != targets.end();
  };
  const IndexSet pool = surrogate_pool(targets, corr, threshold);
  const auto total = static_cast<int>(targets.size());

  ScoreCard card;
  card.surrogate_pool = static_cast<int>(pool.size());
  for (int v : validated) {
    if (is_target(v)) {
      ++card.strict.tp;
    } else {
      ++card.strict.fp;
      if (!std::binary_search(pool.begin(), pool.end(), v)) ++card.relaxed.fp;
    }
  }
  card.strict.fn = total - card.strict.tp;

  for (int t : targets) {
    const bool found = std::any_of(validated.begin(), validated.end(), [&](int v) {
      return v == t || std::abs(corr(v, t)) > threshold;
    });
    if (found) ++card.relaxed.tp;
  }
  card.relaxed.fn = total - card.relaxed.tp;
  card.strict.f2 = f2_score(card.strict.tp, card.strict.fn, card.strict.fp);
  card.relaxed.f2 = f2_score(card.relaxed.tp, card.relaxed.fn, card.relaxed.fp);
  return card;
}

}  // namespace varsel::bench
