#include "varsel/cluster/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "varsel/common/csv.hpp"
#include "varsel/common/error.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/common/stats.hpp"

namespace varsel::cluster {

namespace {

void check_rankable(const DataMatrix& m) {
  if (m.has_missing()) throw InvalidArgument("Spearman correlation needs complete data");
  if (m.rows() < 3) throw InvalidArgument("Spearman correlation needs n >= 3");
}

std::string column_label(const DataMatrix& m, int j) {
  return static_cast<std::size_t>(j) < m.names.size() ? m.names[static_cast<std::size_t>(j)]
                                                      : std::to_string(j);
}

/// Mid-ranks of column j, centered and scaled to unit Euclidean norm.
Vector normalized_ranks(const DataMatrix& m, int j) {
  const auto col = m.values.col(j);
  const auto ranks = stats::mid_ranks({col.data(), static_cast<std::size_t>(col.size())});
  Vector r = Eigen::Map<const Vector>(ranks.data(), static_cast<Eigen::Index>(ranks.size()));
  r.array() -= r.mean();
  const double norm = r.norm();
  if (!(norm > 0.0)) {
    throw InvalidArgument("constant column '" + column_label(m, j) +
                          "': Spearman correlation is undefined");
  }
  return r / norm;
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

Matrix spearman_matrix(const DataMatrix& m, Exec exec) {
  check_rankable(m);
  const int p = m.cols();
  Matrix ranks(m.rows(), p);
  for_each_index(p, exec, [&](int j) { ranks.col(j) = normalized_ranks(m, j); });
  Matrix corr(p, p);
  for_each_index(p, exec, [&](int j) {
    corr(j, j) = 1.0;
    for (int k = j + 1; k < p; ++k) corr(k, j) = clamp_unit(ranks.col(j).dot(ranks.col(k)));
  });
  corr.triangularView<Eigen::StrictlyUpper>() = corr.transpose();
  return corr;
}

Matrix spearman_matrix_reference(const DataMatrix& m) {
  check_rankable(m);
  const int p = m.cols();
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<std::vector<double>> ranks(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    ranks[static_cast<std::size_t>(j)] =
        stats::mid_ranks({m.values.col(j).data(), n});
  }
  Matrix corr = Matrix::Identity(p, p);
  for (int j = 0; j < p; ++j) {
    const auto& a = ranks[static_cast<std::size_t>(j)];
    const double ma = stats::mean(a);
    double saa = 0.0;
    for (double v : a) saa += (v - ma) * (v - ma);
    if (!(saa > 0.0)) {
      throw InvalidArgument("constant column '" + column_label(m, j) +
                            "': Spearman correlation is undefined");
    }
    for (int k = 0; k < j; ++k) {
      const auto& b = ranks[static_cast<std::size_t>(k)];
      const double mb = stats::mean(b);
      double sab = 0.0, sbb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        sbb += (b[i] - mb) * (b[i] - mb);
      }
      corr(j, k) = corr(k, j) = clamp_unit(sab / std::sqrt(saa * sbb));
    }
  }
  return corr;
}

Matrix correlation_to_distance(const Matrix& corr) {
  Matrix d = (1.0 - corr.array().abs()).cwiseMax(0.0).cwiseMin(1.0);
  d.diagonal().setZero();
  return d;
}

Matrix spearman_distance_matrix(const DataMatrix& m, Exec exec) {
  return correlation_to_distance(spearman_matrix(m, exec));
}

Dendrogram agglomerate_complete_linkage(const Matrix& distance) {
  const auto p = static_cast<int>(distance.rows());
  if (distance.cols() != p || p < 1) throw InvalidArgument("distance matrix must be square");
  if (!distance.allFinite()) throw InvalidArgument("distance matrix has non-finite entries");
  if ((distance - distance.transpose()).cwiseAbs().maxCoeff() > 0.0) {
    throw InvalidArgument("distance matrix is not symmetric");
  }

  // Clusters live in the slot of their smallest leaf, so scanning slots in
  // index order visits pairs in the tie-breaking order.
  Matrix d = distance;
  std::vector<char> active(static_cast<std::size_t>(p), 1);
  std::vector<int> node(static_cast<std::size_t>(p));
  std::vector<int> size(static_cast<std::size_t>(p), 1);
  std::iota(node.begin(), node.end(), 0);

  // Nearest later neighbour per slot: distances only grow under complete
  // linkage, so a cached neighbour stays valid unless it was merged.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<int> nn(static_cast<std::size_t>(p), -1);
  std::vector<double> nn_dist(static_cast<std::size_t>(p), kInf);
  auto refresh = [&](int i) {
    nn[static_cast<std::size_t>(i)] = -1;
    nn_dist[static_cast<std::size_t>(i)] = kInf;
    for (int j = i + 1; j < p; ++j) {
      if (active[static_cast<std::size_t>(j)] && d(i, j) < nn_dist[static_cast<std::size_t>(i)]) {
        nn_dist[static_cast<std::size_t>(i)] = d(i, j);
        nn[static_cast<std::size_t>(i)] = j;
      }
    }
  };
  for (int i = 0; i < p; ++i) refresh(i);

  Dendrogram out;
  out.leaf_count = p;
  out.merges.reserve(static_cast<std::size_t>(std::max(p - 1, 0)));
  for (int step = 0; step + 1 < p; ++step) {
    int a = -1;
    for (int i = 0; i < p; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      if (active[iu] && nn[iu] >= 0 &&
          (a < 0 || nn_dist[iu] < nn_dist[static_cast<std::size_t>(a)])) {
        a = i;
      }
    }
    const int b = nn[static_cast<std::size_t>(a)];
    const auto au = static_cast<std::size_t>(a);
    const auto bu = static_cast<std::size_t>(b);
    const double height = d(a, b);
    out.merges.push_back({node[au], node[bu], height, size[au] + size[bu]});

    for (int k = 0; k < p; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == a || k == b) continue;
      const double merged = std::max(d(a, k), d(b, k));
      d(a, k) = d(k, a) = merged;
    }
    active[bu] = 0;
    node[au] = p + step;
    size[au] += size[bu];
    for (int k = 0; k < p; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      if (active[ku] && (k == a || nn[ku] == a || nn[ku] == b)) refresh(k);
    }
  }
  return out;
}

std::vector<IndexSet> ClusterAssignment::groups() const {
  std::vector<IndexSet> out(static_cast<std::size_t>(count));
  for (std::size_t j = 0; j < group_of.size(); ++j) {
    out[static_cast<std::size_t>(group_of[j])].push_back(static_cast<int>(j));
  }
  return out;
}

namespace {

/// Relabels arbitrary component roots so groups are numbered by their
/// smallest member.
ClusterAssignment label_components(const std::vector<int>& root) {
  ClusterAssignment out;
  out.group_of.assign(root.size(), -1);
  std::vector<int> label(root.size(), -1);
  for (std::size_t j = 0; j < root.size(); ++j) {
    auto& l = label[static_cast<std::size_t>(root[j])];
    if (l < 0) l = out.count++;
    out.group_of[j] = l;
  }
  return out;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

/// Parent node id of every node (root maps to -1).
std::vector<int> parent_nodes(const Dendrogram& dend) {
  const int p = dend.leaf_count;
  std::vector<int> parent(static_cast<std::size_t>(2 * p - 1), -1);
  for (std::size_t k = 0; k < dend.merges.size(); ++k) {
    const int id = p + static_cast<int>(k);
    parent[static_cast<std::size_t>(dend.merges[k].left)] = id;
    parent[static_cast<std::size_t>(dend.merges[k].right)] = id;
  }
  return parent;
}

int node_size(const Dendrogram& dend, int node) {
  return node < dend.leaf_count ? 1
                                : dend.merges[static_cast<std::size_t>(node - dend.leaf_count)].size;
}

}  // namespace

ClusterAssignment cut_dendrogram(const Dendrogram& dend, double height) {
  const int p = dend.leaf_count;
  // Union-find over node ids; a merge below the cut joins its two children.
  std::vector<int> parent(static_cast<std::size_t>(std::max(2 * p - 1, 0)));
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t k = 0; k < dend.merges.size(); ++k) {
    const auto& m = dend.merges[k];
    if (!(m.height < height)) continue;
    const int id = p + static_cast<int>(k);
    parent[static_cast<std::size_t>(find_root(parent, m.left))] = id;
    parent[static_cast<std::size_t>(find_root(parent, m.right))] = id;
  }
  std::vector<int> root(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) root[static_cast<std::size_t>(j)] = find_root(parent, j);
  // Map roots (node ids up to 2p-2) into 0..p-1 space for labelling.
  std::vector<int> compact(parent.size(), -1);
  int next = 0;
  for (auto& r : root) {
    auto& c = compact[static_cast<std::size_t>(r)];
    if (c < 0) c = next++;
    r = c;
  }
  return label_components(root);
}

bool is_clade(const Dendrogram& dend, const IndexSet& leaves) {
  if (leaves.empty()) return false;
  if (leaves.size() == 1) return true;
  const auto parent = parent_nodes(dend);
  // Lowest common ancestor of all leaves, one leaf at a time.
  std::vector<char> mark(parent.size(), 0);
  int lca = leaves.front();
  for (std::size_t k = 1; k < leaves.size(); ++k) {
    std::fill(mark.begin(), mark.end(), 0);
    for (int v = lca; v >= 0; v = parent[static_cast<std::size_t>(v)]) {
      mark[static_cast<std::size_t>(v)] = 1;
    }
    int v = leaves[k];
    while (!mark[static_cast<std::size_t>(v)]) v = parent[static_cast<std::size_t>(v)];
    lca = v;
  }
  return node_size(dend, lca) == static_cast<int>(leaves.size());
}

namespace {

/// Rows sorted lexicographically by their values (stable for duplicates).
std::vector<int> canonical_row_order(const Matrix& x) {
  std::vector<int> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    return false;
  });
  return order;
}

bool has_constant_column(const Matrix& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (x.col(j).maxCoeff() == x.col(j).minCoeff()) return true;
  }
  return false;
}

constexpr int kMaxRedraws = 1000;

}  // namespace

StabilityResult bootstrap_cluster_stability(const DataMatrix& m,
                                            const StabilityOptions& options) {
  if (options.replicates < 1) throw InvalidArgument("bootstrap needs at least one replicate");
  if (!(options.threshold > 0.0 && options.threshold <= 1.0)) {
    throw InvalidArgument("stability threshold must lie in (0, 1]");
  }
  const Matrix canonical = select_rows(m.values, canonical_row_order(m.values));
  const DataMatrix base(canonical, m.names);

  StabilityResult result;
  const auto original = cut_dendrogram(
      agglomerate_complete_linkage(spearman_distance_matrix(base, options.exec)),
      options.height);
  for (auto& g : original.groups()) {
    if (g.size() >= 2) result.candidates.push_back(std::move(g));
  }
  const std::size_t c = result.candidates.size();
  const auto b_count = static_cast<std::size_t>(options.replicates);
  std::vector<std::vector<char>> hit(b_count, std::vector<char>(c, 0));
  std::vector<int> redraws(b_count, 0);

  if (c > 0) {
    const int n = base.rows();
    for_each_index(options.replicates, options.exec, [&](int b) {
      const auto bu = static_cast<std::size_t>(b);
      Matrix sample;
      if (!options.resample) {
        sample = canonical;
      } else {
        for (int attempt = 0;; ++attempt) {
          if (attempt > kMaxRedraws) {
            throw NumericalError("bootstrap: every resample has a constant column");
          }
          auto rng = make_rng(options.seed, "cluster-bootstrap",
                              static_cast<std::uint64_t>(b) * (kMaxRedraws + 1) +
                                  static_cast<std::uint64_t>(attempt));
          sample = select_rows(canonical, bootstrap_indices(n, rng));
          if (!has_constant_column(sample)) break;
          ++redraws[bu];
        }
      }
      const auto dend = agglomerate_complete_linkage(
          spearman_distance_matrix(DataMatrix(std::move(sample), base.names), Exec::serial));
      for (std::size_t k = 0; k < c; ++k) hit[bu][k] = is_clade(dend, result.candidates[k]) ? 1 : 0;
    });
  }

  result.support.assign(c, 0);
  for (std::size_t b = 0; b < b_count; ++b) {
    result.redraws += redraws[b];
    for (std::size_t k = 0; k < c; ++k) result.support[k] += hit[b][k];
  }

  // Stable candidates keep their members together; everything else is a
  // singleton.
  const int p = base.cols();
  std::vector<int> root(static_cast<std::size_t>(p));
  std::iota(root.begin(), root.end(), 0);
  for (std::size_t k = 0; k < c; ++k) {
    if (result.support[k] >= options.threshold * options.replicates) {
      for (int j : result.candidates[k]) {
        root[static_cast<std::size_t>(j)] = result.candidates[k].front();
      }
    }
  }
  result.assignment = label_components(root);
  return result;
}

void write_dendrogram_csv(const std::filesystem::path& path, const Dendrogram& dend,
                          const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "step,left,right,height,size,left_label,right_label\n";
  auto label = [&](int node) {
    if (node < dend.leaf_count && static_cast<std::size_t>(node) < names.size()) {
      return csv::escape_field(names[static_cast<std::size_t>(node)]);
    }
    return std::string("node") + std::to_string(node);
  };
  for (std::size_t k = 0; k < dend.merges.size(); ++k) {
    const auto& m = dend.merges[k];
    out << k << ',' << m.left << ',' << m.right << ',' << csv::format_double(m.height) << ','
        << m.size << ',' << label(m.left) << ',' << label(m.right) << '\n';
  }
}

}  // namespace varsel::cluster
