#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "varsel/common/parallel.hpp"
#include "varsel/datagen/data_matrix.hpp"

namespace varsel::cluster {

/// Spearman correlation matrix (Pearson correlation of mid-ranks). Throws
/// InvalidArgument naming the first constant column, or when n < 3 or the
/// matrix has missing cells.
Matrix spearman_matrix(const DataMatrix& m, Exec exec = Exec::parallel);

/// Same quantity computed pair by pair from scratch; slow, kept as the
/// reference the fast path is tested and benchmarked against.
Matrix spearman_matrix_reference(const DataMatrix& m);

/// 1 - |rho_S|, clamped to [0, 1], zero diagonal.
Matrix spearman_distance_matrix(const DataMatrix& m, Exec exec = Exec::parallel);
Matrix correlation_to_distance(const Matrix& corr);

/// One agglomeration step. Leaves are nodes 0..p-1; merge k creates node
/// p + k. `left` is the child containing the smaller leaf index.
struct Merge {
  int left = 0;
  int right = 0;
  double height = 0.0;
  int size = 0;  ///< leaves under the new node
};

struct Dendrogram {
  int leaf_count = 0;
  std::vector<Merge> merges;  ///< exactly leaf_count - 1 entries
};

/// Complete-linkage agglomeration. Among equally close cluster pairs the one
/// with the lexicographically smallest (min leaf of left, min leaf of right)
/// merges first. Throws InvalidArgument for a non-square, asymmetric or
/// non-finite matrix.
Dendrogram agglomerate_complete_linkage(const Matrix& distance);

struct ClusterAssignment {
  std::vector<int> group_of;  ///< per variable, 0..count-1
  int count = 0;

  /// Members of each group, ascending.
  [[nodiscard]] std::vector<IndexSet> groups() const;
};

/// Connected components of the merges with height strictly below h. Group
/// ids are numbered in order of each group's smallest member.
ClusterAssignment cut_dendrogram(const Dendrogram& dendrogram, double height);

/// Smallest dendrogram node containing every listed leaf, and whether that
/// node has no other leaves (the set is a clade).
bool is_clade(const Dendrogram& dendrogram, const IndexSet& leaves);

struct StabilityOptions {
  int replicates = 1000;
  double height = 0.2;
  double threshold = 0.95;
  std::uint64_t seed = 0;
  /// false replaces every resample with the original rows (test hook).
  bool resample = true;
  Exec exec = Exec::parallel;
};

struct StabilityResult {
  ClusterAssignment assignment;
  std::vector<IndexSet> candidates;  ///< multi-member groups of the original cut
  std::vector<int> support;          ///< resamples in which each candidate is a clade
  int redraws = 0;                   ///< resamples redrawn for a constant column
};

/// Bootstrap stability of the clusters cut at `height`. A candidate group is
/// kept when it forms a clade in at least threshold * replicates resampled
/// dendrograms, otherwise its members become singletons. Rows are put in a
/// canonical order first, so the result does not depend on input row order.
StabilityResult bootstrap_cluster_stability(const DataMatrix& m,
                                            const StabilityOptions& options);

/// Merge list as CSV: step,left,right,height,size (node ids as above).
void write_dendrogram_csv(const std::filesystem::path& path,
                          const Dendrogram& dendrogram,
                          const std::vector<std::string>& names);

}  // namespace varsel::cluster
