#pragma once

#include <vector>

#include "varsel/datagen/data_matrix.hpp"

namespace varsel::bench {

/// 5 TP / (5 TP + 4 FN + FP); 0 when all counts are zero. Accepts fractional
/// (averaged) counts. Throws InvalidArgument for a negative or non-finite count.
double f2_score(double tp, double fn, double fp);

struct Counts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double f2 = 0.0;
};

struct ScoreCard {
  Counts strict;
  Counts relaxed;
  int surrogate_pool = 0;  ///< non-target columns that stand in for some target
};

/// Null columns with |corr| > threshold to at least one target, ascending.
IndexSet surrogate_pool(const std::vector<int>& targets, const Matrix& corr,
                        double threshold);

/// Strict: only targets count. Relaxed: a target is found when it, or any
/// validated column correlated with it above the threshold, is validated; a
/// validated surrogate is never a false positive. `corr` holds signed or
/// absolute correlations over all columns. An empty target set scores the
/// global null.
ScoreCard score_selection(const IndexSet& validated, const std::vector<int>& targets,
                          const Matrix& corr, double threshold = 0.8);

}  // namespace varsel::bench
