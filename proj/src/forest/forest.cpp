#include "varsel/forest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include "varsel/common/csv.hpp"
#include "varsel/common/error.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/common/stats.hpp"

namespace varsel::forest {

int default_mtry(int p, Family family) {
  if (p < 1) throw InvalidArgument("default_mtry needs p >= 1");
  const double v = family == Family::binary ? std::sqrt(static_cast<double>(p))
                                            : static_cast<double>(p) / 3.0;
  return std::clamp(static_cast<int>(std::ceil(v - 1e-12)), 1, p);
}

int default_min_node(Family family) { return family == Family::binary ? 1 : 5; }

namespace {

struct Split {
  int variable = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Dense per-column ranks of X, shared by every tree of one fit.
struct RankedDesign {
  Eigen::MatrixXi rank;
  std::vector<std::vector<double>> distinct;  ///< ascending, per column

  explicit RankedDesign(const Matrix& x)
      : rank(x.rows(), x.cols()), distinct(static_cast<std::size_t>(x.cols())) {
    std::vector<int> order(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return x(a, j) < x(b, j); });
      auto& values = distinct[static_cast<std::size_t>(j)];
      for (int i : order) {
        if (values.empty() || x(i, j) != values.back()) values.push_back(x(i, j));
        rank(i, j) = static_cast<int>(values.size()) - 1;
      }
    }
  }
};

class TreeGrower {
 public:
  TreeGrower(const Matrix& x, const Vector& y, const RankedDesign& ranked, int mtry,
             int min_node)
      : x_(x), y_(y), ranked_(ranked), mtry_(mtry), min_node_(min_node) {}

  Tree grow(std::vector<int> rows, Rng& rng) {
    Tree tree;
    tree.uses.assign(static_cast<std::size_t>(x_.cols()), 0);
    tree.nodes.emplace_back();
    // Depth-first with an explicit stack; the left child is expanded first so
    // the random stream is consumed in a fixed order.
    std::vector<std::pair<int, std::vector<int>>> stack;
    stack.emplace_back(0, std::move(rows));
    while (!stack.empty()) {
      auto [id, node_rows] = std::move(stack.back());
      stack.pop_back();
      double sum = 0.0;
      for (int r : node_rows) sum += y_(r);
      const auto count = static_cast<double>(node_rows.size());
      tree.nodes[static_cast<std::size_t>(id)].value = sum / count;

      const Split split = best_split(node_rows, sum, rng);
      if (split.variable < 0) continue;

      std::vector<int> left;
      std::vector<int> right;
      for (int r : node_rows) {
        (x_(r, split.variable) <= split.threshold ? left : right).push_back(r);
      }
      const int left_id = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(id)];
      node.variable = split.variable;
      node.threshold = split.threshold;
      node.left = left_id;
      node.right = left_id + 1;
      tree.uses[static_cast<std::size_t>(split.variable)] = 1;
      stack.emplace_back(left_id + 1, std::move(right));
      stack.emplace_back(left_id, std::move(left));
    }
    return tree;
  }

 private:
  /// Fills (rank, count, y-sum) for the node's distinct values of column j in
  /// ascending order: bucket counting for large nodes, a sort for small ones.
  void collect(const std::vector<int>& rows, int j) {
    const auto& values = ranked_.distinct[static_cast<std::size_t>(j)];
    levels_.clear();
    if (rows.size() * 4 >= values.size()) {
      bucket_count_.assign(values.size(), 0);
      bucket_sum_.assign(values.size(), 0.0);
      for (int r : rows) {
        const auto k = static_cast<std::size_t>(ranked_.rank(r, j));
        ++bucket_count_[k];
        bucket_sum_[k] += y_(r);
      }
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (bucket_count_[k] > 0) {
          levels_.push_back({static_cast<int>(k), bucket_count_[k], bucket_sum_[k]});
        }
      }
      return;
    }
    keyed_.clear();
    for (int r : rows) keyed_.emplace_back(ranked_.rank(r, j), y_(r));
    std::sort(keyed_.begin(), keyed_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [k, v] : keyed_) {
      if (levels_.empty() || levels_.back().rank != k) levels_.push_back({k, 0, 0.0});
      ++levels_.back().count;
      levels_.back().sum += v;
    }
  }

  Split best_split(const std::vector<int>& rows, double sum, Rng& rng) {
    const int n = static_cast<int>(rows.size());
    Split best;
    if (n < 2 * min_node_) return best;
    double sum_sq = 0.0;
    for (int r : rows) sum_sq += y_(r) * y_(r);
    const double parent = sum * sum / n;
    const double node_ss = sum_sq - parent;
    if (!(node_ss > 1e-12 * std::max(1.0, sum_sq))) return best;  // pure node

    const auto candidates = sample_without_replacement(static_cast<int>(x_.cols()), mtry_, rng);
    const double min_gain = 1e-12 * node_ss;
    for (int j : candidates) {
      collect(rows, j);
      if (levels_.size() < 2) continue;
      const auto& values = ranked_.distinct[static_cast<std::size_t>(j)];
      double left_sum = 0.0;
      int n_left = 0;
      for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
        left_sum += levels_[k].sum;
        n_left += levels_[k].count;
        if (n_left < min_node_) continue;
        if (n - n_left < min_node_) break;
        const double right_sum = sum - left_sum;
        const double gain =
            left_sum * left_sum / n_left + right_sum * right_sum / (n - n_left) - parent;
        if (gain > best.gain && gain > min_gain) {
          const double here = values[static_cast<std::size_t>(levels_[k].rank)];
          const double next = values[static_cast<std::size_t>(levels_[k + 1].rank)];
          best.variable = j;
          best.threshold = here + (next - here) / 2.0;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  struct Level {
    int rank;
    int count;
    double sum;
  };

  const Matrix& x_;
  const Vector& y_;
  const RankedDesign& ranked_;
  int mtry_;
  int min_node_;
  std::vector<Level> levels_;
  std::vector<int> bucket_count_;
  std::vector<double> bucket_sum_;
  std::vector<std::pair<int, double>> keyed_;
};

void check_xy(const Matrix& x, const Vector& y, Family family) {
  if (x.rows() != y.size()) throw InvalidArgument("forest: X and y row counts differ");
  if (x.rows() < 2 || x.cols() < 1) throw InvalidArgument("forest: empty design");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("forest: non-finite data");
  if (family == Family::binary) {
    for (double v : y) {
      if (v != 0.0 && v != 1.0) throw InvalidArgument("forest: binary outcome must be 0/1");
    }
  }
}

double loss(Family family, double truth, double prediction) {
  if (family == Family::binary) return (prediction > 0.5 ? 1.0 : 0.0) != truth ? 1.0 : 0.0;
  const double e = truth - prediction;
  return e * e;
}

}  // namespace

ForestModel fit_forest(const Matrix& x, const Vector& y, Family family,
                       const ForestParams& params) {
  check_xy(x, y, family);
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (params.n_trees < 1) throw InvalidArgument("forest: n_trees must be >= 1");
  ForestModel model;
  model.family = family;
  model.p = p;
  model.mtry = params.mtry > 0 ? params.mtry : default_mtry(p, family);
  model.min_node = params.min_node > 0 ? params.min_node : default_min_node(family);
  model.seed = params.seed;
  if (model.mtry > p) throw InvalidArgument("forest: mtry exceeds the number of covariates");

  const RankedDesign ranked(x);
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  for_each_index(params.n_trees, params.exec, [&](int t) {
    auto rng = make_rng(params.seed, "forest-tree", static_cast<std::uint64_t>(t));
    std::vector<int> rows;
    if (params.bootstrap) {
      rows = bootstrap_indices(n, rng);
    } else {
      rows.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    }
    std::vector<char> drawn(static_cast<std::size_t>(n), 0);
    for (int r : rows) drawn[static_cast<std::size_t>(r)] = 1;
    TreeGrower grower(x, y, ranked, model.mtry, model.min_node);
    Tree tree = grower.grow(std::move(rows), rng);
    for (int i = 0; i < n; ++i) {
      if (!drawn[static_cast<std::size_t>(i)]) tree.oob_rows.push_back(i);
    }
    model.trees[static_cast<std::size_t>(t)] = std::move(tree);
  });
  return model;
}

Vector ForestModel::predict(const Matrix& x) const {
  Vector out = Vector::Zero(x.rows());
  for (const auto& tree : trees) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out(i) += tree.predict([&](int j) { return x(i, j); });
    }
  }
  return out / static_cast<double>(trees.size());
}

Vector ForestModel::oob_predict(const Matrix& x) const {
  Vector sum = Vector::Zero(x.rows());
  Eigen::VectorXi count = Eigen::VectorXi::Zero(x.rows());
  for (const auto& tree : trees) {
    for (int i : tree.oob_rows) {
      sum(i) += tree.predict([&](int j) { return x(i, j); });
      ++count(i);
    }
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sum(i) = count(i) > 0 ? sum(i) / count(i) : std::numeric_limits<double>::quiet_NaN();
  }
  return sum;
}

double tree_oob_error(const ForestModel& model, const Tree& tree, const Matrix& x,
                      const Vector& y) {
  if (tree.oob_rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (int i : tree.oob_rows) {
    total += loss(model.family, y(i), tree.predict([&](int j) { return x(i, j); }));
  }
  return total / static_cast<double>(tree.oob_rows.size());
}

VimpResult permutation_vimp(const ForestModel& model, const Matrix& x, const Vector& y,
                            Exec exec) {
  check_xy(x, y, model.family);
  if (x.cols() != model.p) throw InvalidArgument("permutation_vimp: column count mismatch");
  const int p = model.p;
  const int trees = static_cast<int>(model.trees.size());
  Matrix delta = Matrix::Zero(p, trees);
  std::vector<double> baseline(static_cast<std::size_t>(trees),
                               std::numeric_limits<double>::quiet_NaN());

  for_each_index(trees, exec, [&](int t) {
    const Tree& tree = model.trees[static_cast<std::size_t>(t)];
    if (tree.oob_rows.empty()) return;
    const double base = tree_oob_error(model, tree, x, y);
    baseline[static_cast<std::size_t>(t)] = base;
    const int m = static_cast<int>(tree.oob_rows.size());
    const auto tree_seed = derive_seed(model.seed, "forest-vimp", static_cast<std::uint64_t>(t));
    for (int v = 0; v < p; ++v) {
      if (!tree.uses[static_cast<std::size_t>(v)]) continue;
      auto rng = make_rng(tree_seed, "variable", static_cast<std::uint64_t>(v));
      const auto perm = random_permutation(m, rng);
      double total = 0.0;
      for (int k = 0; k < m; ++k) {
        const int i = tree.oob_rows[static_cast<std::size_t>(k)];
        const int donor = tree.oob_rows[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
        const double pred =
            tree.predict([&](int j) { return j == v ? x(donor, j) : x(i, j); });
        total += loss(model.family, y(i), pred);
      }
      delta(v, t) = total / m - base;
    }
  });

  VimpResult result;
  result.importance = Vector::Zero(p);
  result.tree_se = Vector::Zero(p);
  int used = 0;
  double base_sum = 0.0;
  for (int t = 0; t < trees; ++t) {
    if (std::isnan(baseline[static_cast<std::size_t>(t)])) continue;
    ++used;
    base_sum += baseline[static_cast<std::size_t>(t)];
    result.importance += delta.col(t);
  }
  if (used == 0) throw NumericalError("permutation_vimp: no tree has out-of-bag rows");
  result.importance /= used;
  result.baseline_error = base_sum / used;
  if (used > 1) {
    for (int t = 0; t < trees; ++t) {
      if (std::isnan(baseline[static_cast<std::size_t>(t)])) continue;
      result.tree_se.array() += (delta.col(t) - result.importance).array().square();
    }
    result.tree_se = (result.tree_se / (used - 1)).cwiseSqrt() / std::sqrt(double(used));
  }
  return result;
}

double ci_multiplier(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must be in (0, 1)");
  return stats::normal_quantile(1.0 - (1.0 - level) / 2.0);
}

std::vector<VimpEstimate> vimp_confidence_intervals(const Matrix& x, const Vector& y,
                                                    Family family,
                                                    const ForestParams& params,
                                                    const VimpCiOptions& options) {
  check_xy(x, y, family);
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const int m = options.subsample_size > 0 ? options.subsample_size : n / 2;
  if (m < 2 || m >= n) throw InvalidArgument("VIMP subsample size must be in [2, n)");
  if (options.subsamples < 2) throw InvalidArgument("VIMP CI needs at least 2 subsamples");
  const double level = options.level > 0.0 ? options.level : 1.0 - 0.05 / p;
  const double z = ci_multiplier(level);

  const auto full_model = fit_forest(x, y, family, params);
  const Vector full = permutation_vimp(full_model, x, y, params.exec).importance;

  // Subsamples run in parallel; each inner forest is then serial.
  const int k = options.subsamples;
  Matrix draws(p, k);
  for_each_index(k, options.exec, [&](int b) {
    auto rng = make_rng(options.seed, "vimp-subsample", static_cast<std::uint64_t>(b));
    auto rows = sample_without_replacement(n, m, rng);
    std::sort(rows.begin(), rows.end());
    const Matrix xs = select_rows(x, rows);
    const Vector ys = select_entries(y, rows);
    ForestParams sub = params;
    sub.seed = derive_seed(params.seed, "vimp-subsample-forest", static_cast<std::uint64_t>(b));
    sub.exec = options.exec == Exec::parallel ? Exec::serial : params.exec;
    const auto model = fit_forest(xs, ys, family, sub);
    draws.col(b) = permutation_vimp(model, xs, ys, sub.exec).importance;
  });

  const double scale = static_cast<double>(m) / (static_cast<double>(n - m) * k);
  std::vector<VimpEstimate> out(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    const double ss = (draws.row(j).array() - full(j)).square().sum();
    auto& e = out[static_cast<std::size_t>(j)];
    e.variable = j;
    e.vimp = full(j);
    e.std_error = std::sqrt(scale * ss);
    e.lower = e.vimp - z * e.std_error;
    e.upper = e.vimp + z * e.std_error;
  }
  return out;
}

IndexSet select_by_vimp_ci(const std::vector<VimpEstimate>& estimates) {
  IndexSet out;
  for (const auto& e : estimates) {
    if (e.lower > 0.0) out.push_back(e.variable);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_vimp_csv(const std::filesystem::path& path,
                    const std::vector<VimpEstimate>& estimates,
                    const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "variable,name,vimp,std_error,lower,upper,selected\n";
  for (const auto& e : estimates) {
    const auto idx = static_cast<std::size_t>(e.variable);
    const std::string name = idx < names.size() ? names[idx] : std::to_string(e.variable);
    out << e.variable << ',' << csv::escape_field(name) << ',' << csv::format_double(e.vimp)
        << ',' << csv::format_double(e.std_error) << ',' << csv::format_double(e.lower) << ','
        << csv::format_double(e.upper) << ',' << (e.lower > 0.0 ? 1 : 0) << '\n';
  }
}

}  // namespace varsel::forest
