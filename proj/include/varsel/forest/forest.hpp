#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "varsel/common/parallel.hpp"
#include "varsel/datagen/data_matrix.hpp"

namespace varsel::forest {

/// ceil(p/3) for continuous outcomes, ceil(sqrt(p)) for binary.
int default_mtry(int p, Family family);
/// 5 for continuous outcomes, 1 for binary.
int default_min_node(Family family);

struct ForestParams {
  int n_trees = 1000;
  int mtry = 0;       ///< 0 selects default_mtry; mtry = p is bagging
  int min_node = 0;   ///< minimum rows per child; 0 selects default_min_node
  bool bootstrap = true;  ///< false grows every tree on all rows (test hook)
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

/// Flat CART node; a leaf has variable == -1. Rows with x <= threshold go left.
struct TreeNode {
  int variable = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  ///< mean outcome of the training rows in the node
};

struct Tree {
  std::vector<TreeNode> nodes;  ///< root at 0
  std::vector<int> oob_rows;    ///< rows not drawn into the bootstrap, ascending
  std::vector<char> uses;       ///< per variable: appears in some split

  /// `row` is any indexable sequence of covariate values.
  template <class Row>
  [[nodiscard]] double predict(const Row& row) const {
    int k = 0;
    while (nodes[static_cast<std::size_t>(k)].variable >= 0) {
      const auto& node = nodes[static_cast<std::size_t>(k)];
      k = row(node.variable) <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
  }
};

struct ForestModel {
  Family family = Family::continuous;
  int p = 0;
  int mtry = 0;
  int min_node = 0;
  std::uint64_t seed = 0;
  std::vector<Tree> trees;

  /// Mean of the tree predictions (class-1 probability for binary outcomes).
  [[nodiscard]] Vector predict(const Matrix& x) const;
  /// Per row, mean over the trees for which the row is out of bag; NaN for a
  /// row that is in bag everywhere.
  [[nodiscard]] Vector oob_predict(const Matrix& x) const;
};

/// Grows the forest. Splits maximize the decrease in within-node sum of
/// squares, which for 0/1 outcomes is the decrease in Gini impurity (both
/// are n * p(1 - p) up to a factor). Throws InvalidArgument for mtry outside
/// 1..p or mismatched shapes.
ForestModel fit_forest(const Matrix& x, const Vector& y, Family family,
                       const ForestParams& params = {});

/// Out-of-bag error of one tree: MSE (continuous) or misclassification rate
/// with the leaf proportion thresholded at 0.5 (binary).
double tree_oob_error(const ForestModel& model, const Tree& tree, const Matrix& x,
                      const Vector& y);

struct VimpResult {
  Vector importance;       ///< per variable: mean over trees of permuted - baseline OOB error
  Vector tree_se;          ///< SD of the per-tree differences / sqrt(trees)
  double baseline_error = 0.0;  ///< mean per-tree OOB error
};

/// OOB permutation importance. Each tree's OOB rows have column j permuted
/// (stream derived from the model seed, tree and variable); trees that never
/// split on j contribute exactly zero. The model is not modified.
VimpResult permutation_vimp(const ForestModel& model, const Matrix& x, const Vector& y,
                            Exec exec = Exec::parallel);

struct VimpEstimate {
  int variable = -1;
  double vimp = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct VimpCiOptions {
  double level = -1.0;      ///< < 0 selects 1 - 0.05/p
  int subsamples = 100;
  int subsample_size = 0;   ///< 0 selects floor(n/2)
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

/// Two-sided normal quantile for a confidence level.
double ci_multiplier(double level);

/// Full-data VIMP with a subsampling standard error:
///   var_j = m / ((n - m) K) * sum_b (vimp_bj - vimp_j)^2
/// over K forests grown on size-m subsets drawn without replacement.
std::vector<VimpEstimate> vimp_confidence_intervals(const Matrix& x, const Vector& y,
                                                    Family family,
                                                    const ForestParams& params,
                                                    const VimpCiOptions& options = {});

/// Variables whose interval lies strictly above zero.
IndexSet select_by_vimp_ci(const std::vector<VimpEstimate>& estimates);

void write_vimp_csv(const std::filesystem::path& path,
                    const std::vector<VimpEstimate>& estimates,
                    const std::vector<std::string>& names);

}  // namespace varsel::forest
