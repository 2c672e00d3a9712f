#include "varsel/bart/bart.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "varsel/common/csv.hpp"
#include "varsel/common/error.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/common/stats.hpp"

namespace varsel::bart {

namespace {

constexpr double kGrowProb = 2.5 / 9.0;
constexpr double kPruneProb = 2.5 / 9.0;

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Z ~ N(0, 1) conditioned on Z > a. Plain rejection when the bound is not
/// in the upper tail, otherwise the exponential proposal of Robert (1995).
double truncated_normal_above(double a, Rng& rng) {
  std::normal_distribution<double> normal;
  if (a < 0.5) {
    while (true) {
      const double z = normal(rng);
      if (z > a) return z;
    }
  }
  const double rate = (a + std::sqrt(a * a + 4.0)) / 2.0;
  std::exponential_distribution<double> expo(rate);
  std::uniform_real_distribution<double> unif;
  while (true) {
    const double z = a + expo(rng);
    const double d = z - rate;
    if (unif(rng) <= std::exp(-d * d / 2.0)) return z;
  }
}

struct Node {
  int parent = -1;
  int left = -1;
  int right = -1;
  int variable = -1;
  double cut = 0.0;
  int depth = 0;
  double mu = 0.0;
  bool growable = false;
  bool alive = true;
  std::vector<int> rows;

  [[nodiscard]] bool is_leaf() const { return left < 0; }
};

struct Tree {
  std::vector<Node> nodes;
  std::vector<int> free_slots;
  Vector fit;  ///< leaf value of every training row

  int add(Node node) {
    if (!free_slots.empty()) {
      const int id = free_slots.back();
      free_slots.pop_back();
      nodes[static_cast<std::size_t>(id)] = std::move(node);
      return id;
    }
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size()) - 1;
  }

  void release(int id) {
    auto& node = nodes[static_cast<std::size_t>(id)];
    node.alive = false;
    node.rows.clear();
    free_slots.push_back(id);
  }

  Node& at(int id) { return nodes[static_cast<std::size_t>(id)]; }
  [[nodiscard]] const Node& at(int id) const { return nodes[static_cast<std::size_t>(id)]; }
};

struct Rule {
  int variable = -1;
  double cut = 0.0;
  std::vector<int> left;
  std::vector<int> right;
};

class Sampler {
 public:
  Sampler(const Matrix& x, const BartParams& params, double leaf_sd, Rng& rng)
      : x_(x), params_(params), tau2_(leaf_sd * leaf_sd), rng_(rng),
        p_(static_cast<int>(x.cols())), rank_(x.rows(), x.cols()),
        distinct_(static_cast<std::size_t>(x.cols())) {
    // Dense ranks let a node's candidate cuts be found without sorting.
    std::vector<int> order(static_cast<std::size_t>(x.rows()));
    for (int j = 0; j < p_; ++j) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return x(a, j) < x(b, j); });
      auto& values = distinct_[static_cast<std::size_t>(j)];
      for (int i : order) {
        if (values.empty() || x(i, j) != values.back()) values.push_back(x(i, j));
        rank_(i, j) = static_cast<int>(values.size()) - 1;
      }
    }
  }

  Tree stump(int n) const {
    Tree tree;
    Node root;
    root.rows.resize(static_cast<std::size_t>(n));
    std::iota(root.rows.begin(), root.rows.end(), 0);
    root.growable = growable(root.rows);
    tree.nodes.push_back(std::move(root));
    tree.fit = Vector::Zero(n);
    return tree;
  }

  /// One Metropolis-Hastings proposal followed by fresh leaf draws, against
  /// the partial residual. Returns 0 (rejected), 1 grow, 2 prune, 3 change.
  int step(Tree& tree, const Vector& residual, double sigma2) {
    sigma2_ = sigma2;
    int accepted = 0;
    const bool is_stump = tree.at(0).is_leaf();
    const double u = unif_(rng_);
    if (is_stump || u < kGrowProb) {
      accepted = grow(tree, residual, is_stump) ? 1 : 0;
    } else if (u < kGrowProb + kPruneProb) {
      accepted = prune(tree, residual) ? 2 : 0;
    } else {
      accepted = change(tree, residual) ? 3 : 0;
    }
    draw_leaves(tree, residual);
    return accepted;
  }

 private:
  double split_prob(int depth) const {
    return params_.tree_alpha * std::pow(1.0 + depth, -params_.tree_beta);
  }

  /// log prior factor of a leaf at `depth`: it declined to split.
  double leaf_log_prior(bool can_grow, int depth) const {
    return can_grow ? std::log1p(-split_prob(depth)) : 0.0;
  }

  double log_lik(double sum, double count) const {
    if (params_.prior_only) return 0.0;
    const double denom = sigma2_ + count * tau2_;
    return 0.5 * std::log(sigma2_ / denom) + tau2_ * sum * sum / (2.0 * sigma2_ * denom);
  }

  double log_lik(const std::vector<int>& rows, const Vector& r) const {
    double sum = 0.0;
    for (int i : rows) sum += r(i);
    return log_lik(sum, static_cast<double>(rows.size()));
  }

  bool varies(const std::vector<int>& rows, int j) const {
    const int first = rank_(rows.front(), j);
    for (int i : rows) {
      if (rank_(i, j) != first) return true;
    }
    return false;
  }

  bool growable(const std::vector<int>& rows) const {
    if (rows.size() < 2) return false;
    for (int j = 0; j < p_; ++j) {
      if (varies(rows, j)) return true;
    }
    return false;
  }

  /// Variable uniform over those that vary in the node, cut uniform over the
  /// node's distinct values except the largest. The node must be growable.
  Rule draw_rule(const std::vector<int>& rows) {
    Rule rule;
    std::uniform_int_distribution<int> pick_var(0, p_ - 1);
    for (int attempt = 0; attempt < 20 * p_ && rule.variable < 0; ++attempt) {
      const int j = pick_var(rng_);
      if (varies(rows, j)) rule.variable = j;
    }
    if (rule.variable < 0) {
      std::vector<int> valid;
      for (int j = 0; j < p_; ++j) {
        if (varies(rows, j)) valid.push_back(j);
      }
      std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
      rule.variable = valid[pick(rng_)];
    }
    const int j = rule.variable;
    const auto& values = distinct_[static_cast<std::size_t>(j)];
    std::vector<int>& present = scratch_;
    present.clear();
    if (rows.size() * 8 < values.size()) {
      for (int i : rows) present.push_back(rank_(i, j));
      std::sort(present.begin(), present.end());
      present.erase(std::unique(present.begin(), present.end()), present.end());
    } else {
      marks_.assign(values.size(), 0);
      for (int i : rows) marks_[static_cast<std::size_t>(rank_(i, j))] = 1;
      for (std::size_t k = 0; k < marks_.size(); ++k) {
        if (marks_[k]) present.push_back(static_cast<int>(k));
      }
    }
    std::uniform_int_distribution<std::size_t> pick_cut(0, present.size() - 2);
    const int cut_rank = present[pick_cut(rng_)];
    rule.cut = values[static_cast<std::size_t>(cut_rank)];
    rule.left.reserve(rows.size());
    rule.right.reserve(rows.size());
    for (int i : rows) (rank_(i, j) <= cut_rank ? rule.left : rule.right).push_back(i);
    return rule;
  }

  static int count_growable_leaves(const Tree& tree) {
    int b = 0;
    for (const auto& node : tree.nodes) b += node.alive && node.is_leaf() && node.growable;
    return b;
  }

  static std::vector<int> leaf_parents(const Tree& tree) {
    std::vector<int> out;
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      const auto& node = tree.nodes[k];
      if (node.alive && !node.is_leaf() && tree.at(node.left).is_leaf() &&
          tree.at(node.right).is_leaf()) {
        out.push_back(static_cast<int>(k));
      }
    }
    return out;
  }

  bool accept(double log_ratio) { return std::log(unif_(rng_)) < log_ratio; }

  bool grow(Tree& tree, const Vector& r, bool is_stump) {
    std::vector<int> candidates;
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      const auto& node = tree.nodes[k];
      if (node.alive && node.is_leaf() && node.growable) candidates.push_back(static_cast<int>(k));
    }
    if (candidates.empty()) return false;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const int id = candidates[pick(rng_)];
    const Node& leaf = tree.at(id);
    Rule rule = draw_rule(leaf.rows);

    int w2_after = static_cast<int>(leaf_parents(tree).size()) + 1;
    if (leaf.parent >= 0) {
      const Node& parent = tree.at(leaf.parent);
      const int sibling = parent.left == id ? parent.right : parent.left;
      if (tree.at(sibling).is_leaf()) --w2_after;
    }
    const bool grow_left = growable(rule.left);
    const bool grow_right = growable(rule.right);
    const int d = leaf.depth;
    const double log_ratio =
        std::log(kPruneProb) - std::log(is_stump ? 1.0 : kGrowProb) +
        std::log(static_cast<double>(candidates.size())) - std::log(static_cast<double>(w2_after)) +
        std::log(split_prob(d)) + leaf_log_prior(grow_left, d + 1) +
        leaf_log_prior(grow_right, d + 1) - std::log1p(-split_prob(d)) +
        log_lik(rule.left, r) + log_lik(rule.right, r) - log_lik(leaf.rows, r);
    if (!accept(log_ratio)) return false;

    Node left;
    left.parent = id;
    left.depth = d + 1;
    left.growable = grow_left;
    left.rows = std::move(rule.left);
    Node right;
    right.parent = id;
    right.depth = d + 1;
    right.growable = grow_right;
    right.rows = std::move(rule.right);
    const int left_id = tree.add(std::move(left));
    const int right_id = tree.add(std::move(right));
    Node& node = tree.at(id);
    node.left = left_id;
    node.right = right_id;
    node.variable = rule.variable;
    node.cut = rule.cut;
    return true;
  }

  bool prune(Tree& tree, const Vector& r) {
    const auto candidates = leaf_parents(tree);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const int id = candidates[pick(rng_)];
    const Node& node = tree.at(id);
    const Node& left = tree.at(node.left);
    const Node& right = tree.at(node.right);
    const int b_after = count_growable_leaves(tree) - left.growable - right.growable + 1;
    const int d = node.depth;
    const double log_ratio =
        std::log(id == 0 ? 1.0 : kGrowProb) - std::log(kPruneProb) +
        std::log(static_cast<double>(candidates.size())) - std::log(static_cast<double>(b_after)) -
        (std::log(split_prob(d)) + leaf_log_prior(left.growable, d + 1) +
         leaf_log_prior(right.growable, d + 1) - std::log1p(-split_prob(d))) -
        (log_lik(left.rows, r) + log_lik(right.rows, r) - log_lik(node.rows, r));
    if (!accept(log_ratio)) return false;

    tree.release(node.left);
    tree.release(node.right);
    Node& kept = tree.at(id);
    kept.left = kept.right = -1;
    kept.variable = -1;
    kept.growable = true;
    return true;
  }

  bool change(Tree& tree, const Vector& r) {
    const auto candidates = leaf_parents(tree);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const int id = candidates[pick(rng_)];
    const Node& node = tree.at(id);
    Rule rule = draw_rule(node.rows);
    const Node& old_left = tree.at(node.left);
    const Node& old_right = tree.at(node.right);
    const bool grow_left = growable(rule.left);
    const bool grow_right = growable(rule.right);
    const int d = node.depth + 1;
    const double log_ratio =
        log_lik(rule.left, r) + log_lik(rule.right, r) - log_lik(old_left.rows, r) -
        log_lik(old_right.rows, r) + leaf_log_prior(grow_left, d) +
        leaf_log_prior(grow_right, d) - leaf_log_prior(old_left.growable, d) -
        leaf_log_prior(old_right.growable, d);
    if (!accept(log_ratio)) return false;

    Node& target = tree.at(id);
    target.variable = rule.variable;
    target.cut = rule.cut;
    Node& left = tree.at(target.left);
    left.rows = std::move(rule.left);
    left.growable = grow_left;
    Node& right = tree.at(target.right);
    right.rows = std::move(rule.right);
    right.growable = grow_right;
    return true;
  }

  void draw_leaves(Tree& tree, const Vector& r) {
    for (auto& node : tree.nodes) {
      if (!node.alive || !node.is_leaf()) continue;
      double sum = 0.0;
      for (int i : node.rows) sum += r(i);
      const double count = static_cast<double>(node.rows.size());
      const double var = 1.0 / (1.0 / tau2_ + count / sigma2_);
      node.mu = var * sum / sigma2_ + std::sqrt(var) * normal_(rng_);
      if (!std::isfinite(node.mu)) throw NumericalError("BART: non-finite leaf value");
      for (int i : node.rows) tree.fit(i) = node.mu;
    }
  }

  const Matrix& x_;
  const BartParams& params_;
  double tau2_;
  Rng& rng_;
  int p_;
  Eigen::MatrixXi rank_;
  std::vector<std::vector<double>> distinct_;
  std::vector<int> scratch_;
  std::vector<char> marks_;
  double sigma2_ = 1.0;
  std::uniform_real_distribution<double> unif_;
  std::normal_distribution<double> normal_;
};

FlatTree flatten(const Tree& tree) {
  FlatTree out;
  // Preorder copy with remapped child indices.
  std::vector<int> order;
  std::vector<int> remap(tree.nodes.size(), -1);
  std::vector<int> todo{0};
  while (!todo.empty()) {
    const int id = todo.back();
    todo.pop_back();
    remap[static_cast<std::size_t>(id)] = static_cast<int>(order.size());
    order.push_back(id);
    const auto& node = tree.at(id);
    if (!node.is_leaf()) {
      todo.push_back(node.right);
      todo.push_back(node.left);
    }
  }
  out.reserve(order.size());
  for (int id : order) {
    const auto& node = tree.at(id);
    FlatNode flat;
    flat.value = node.mu;
    if (!node.is_leaf()) {
      flat.variable = node.variable;
      flat.cut = node.cut;
      flat.left = remap[static_cast<std::size_t>(node.left)];
      flat.right = remap[static_cast<std::size_t>(node.right)];
    }
    out.push_back(flat);
  }
  return out;
}

double predict_flat(const FlatTree& tree, const Matrix& x, Eigen::Index i) {
  int k = 0;
  while (tree[static_cast<std::size_t>(k)].variable >= 0) {
    const auto& node = tree[static_cast<std::size_t>(k)];
    k = x(i, node.variable) <= node.cut ? node.left : node.right;
  }
  return tree[static_cast<std::size_t>(k)].value;
}

void check_params(const BartParams& params) {
  if (params.trees < 1 || params.burn_in < 0 || params.kept < 1) {
    throw InvalidArgument("BART: need trees >= 1, burn_in >= 0, kept >= 1");
  }
  if (!(params.tree_alpha > 0.0 && params.tree_alpha < 1.0) || params.tree_beta < 0.0) {
    throw InvalidArgument("BART: tree prior needs 0 < alpha < 1 and beta >= 0");
  }
  if (!(params.leaf_k > 0.0) || !(params.sigma_nu > 0.0) ||
      !(params.sigma_q > 0.0 && params.sigma_q < 1.0)) {
    throw InvalidArgument("BART: need k > 0, nu > 0 and 0 < q < 1");
  }
}

/// Residual SD of an OLS fit with intercept when n > p + 1, else the SD of y.
double data_sigma(const Matrix& x, const Vector& y) {
  const auto n = y.size();
  const auto p = x.cols();
  std::span<const double> ys(y.data(), static_cast<std::size_t>(n));
  if (n > p + 1) {
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    const Eigen::ColPivHouseholderQR<Matrix> qr(design);
    const Vector resid = y - design * qr.solve(y);
    const auto df = static_cast<double>(n - qr.rank());
    if (df > 0.0) return std::sqrt(resid.squaredNorm() / df);
  }
  return stats::sample_sd(ys);
}

}  // namespace

BartPosterior fit_bart(const Matrix& x, const Vector& y, Family family,
                       const BartParams& params) {
  check_params(params);
  if (x.rows() != y.size()) throw InvalidArgument("BART: X and y row counts differ");
  if (x.rows() < 2 || x.cols() < 1) throw InvalidArgument("BART: empty design");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("BART: non-finite data");
  const int n = static_cast<int>(x.rows());

  BartPosterior post;
  post.family = family;
  post.params = params;
  post.n = n;
  post.p = static_cast<int>(x.cols());

  Vector target(n);
  double leaf_sd = 0.0;
  double sigma2 = 1.0;
  double nu_lambda = 0.0;
  std::vector<double> positive;
  if (family == Family::continuous) {
    post.y_min = y.minCoeff();
    post.y_range = y.maxCoeff() - post.y_min;
    if (!(post.y_range > 0.0)) {
      // Constant outcome: fit zero residuals around it.
      post.y_min -= 0.5;
      post.y_range = 1.0;
    }
    target = ((y.array() - post.y_min) / post.y_range - 0.5).matrix();
    leaf_sd = 0.5 / (params.leaf_k * std::sqrt(static_cast<double>(params.trees)));
    post.sigma_hat = data_sigma(x, target);
    if (!(post.sigma_hat > 1e-12)) post.sigma_hat = 1.0;
    const boost::math::chi_squared_distribution<double> chi(params.sigma_nu);
    const double lambda =
        post.sigma_hat * post.sigma_hat * boost::math::quantile(chi, 1.0 - params.sigma_q) /
        params.sigma_nu;
    nu_lambda = params.sigma_nu * lambda;
    sigma2 = post.sigma_hat * post.sigma_hat;
  } else {
    for (double v : y) {
      if (v != 0.0 && v != 1.0) throw InvalidArgument("BART: binary outcome must be 0/1");
    }
    // Probit scale: +/-3 covers essentially all probabilities.
    leaf_sd = 3.0 / (params.leaf_k * std::sqrt(static_cast<double>(params.trees)));
    target = (y.array() * 2.0 - 1.0).matrix();  // latent start on the right side of 0
  }

  Rng rng = make_rng(params.seed, "bart");
  Sampler sampler(x, params, leaf_sd, rng);
  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(params.trees));
  for (int t = 0; t < params.trees; ++t) trees.push_back(sampler.stump(n));
  Vector total = Vector::Zero(n);
  Vector residual(n);

  post.split_counts.assign(static_cast<std::size_t>(post.p), 0.0);
  post.train_mean = Vector::Zero(n);
  std::normal_distribution<double> normal;
  const int iterations = params.burn_in + params.kept;
  for (int it = 0; it < iterations; ++it) {
    for (auto& tree : trees) {
      residual = target - total + tree.fit;
      total -= tree.fit;
      const int move = sampler.step(tree, residual, sigma2);
      total += tree.fit;
      if (it >= params.burn_in) {
        post.grow_accepted += move == 1;
        post.prune_accepted += move == 2;
        post.change_accepted += move == 3;
      }
    }
    if (family == Family::continuous) {
      const double sse = (target - total).squaredNorm();
      std::chi_squared_distribution<double> chi(params.sigma_nu + n);
      sigma2 = (nu_lambda + sse) / chi(rng);
    } else {
      for (int i = 0; i < n; ++i) {
        const double mean = total(i);
        target(i) = y(i) > 0.5 ? mean + truncated_normal_above(-mean, rng)
                               : mean - truncated_normal_above(mean, rng);
      }
    }
    if (it < params.burn_in) continue;

    for (const auto& tree : trees) {
      for (const auto& node : tree.nodes) {
        if (node.alive && !node.is_leaf()) {
          post.split_counts[static_cast<std::size_t>(node.variable)] += 1.0;
          post.total_splits += 1.0;
        }
      }
    }
    if (family == Family::continuous) {
      post.sigma.push_back(std::sqrt(sigma2) * post.y_range);
      post.train_mean += total;
    } else {
      post.train_mean += total.unaryExpr([](double f) { return std_normal_cdf(f); });
    }
    if (params.store_trees) {
      std::vector<FlatTree> ensemble;
      ensemble.reserve(trees.size());
      for (const auto& tree : trees) ensemble.push_back(flatten(tree));
      post.ensembles.push_back(std::move(ensemble));
    }
  }
  post.train_mean /= params.kept;
  if (family == Family::continuous) {
    post.train_mean = ((post.train_mean.array() + 0.5) * post.y_range + post.y_min).matrix();
  }
  return post;
}

Vector BartPosterior::predict(const Matrix& x) const {
  if (ensembles.empty()) throw InvalidArgument("BART posterior has no stored trees");
  if (x.cols() != p) throw InvalidArgument("BART predict: column count mismatch");
  Vector out = Vector::Zero(x.rows());
  for (const auto& ensemble : ensembles) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double f = 0.0;
      for (const auto& tree : ensemble) f += predict_flat(tree, x, i);
      out(i) += family == Family::binary ? std_normal_cdf(f) : (f + 0.5) * y_range + y_min;
    }
  }
  return out / static_cast<double>(ensembles.size());
}

InclusionProportions inclusion_proportions(const BartPosterior& post) {
  InclusionProportions out;
  out.values = Vector::Constant(post.p, 1.0 / post.p);
  if (post.total_splits <= 0.0) {
    out.uniform_fallback = true;
    return out;
  }
  for (int j = 0; j < post.p; ++j) {
    out.values(j) = post.split_counts[static_cast<std::size_t>(j)] / post.total_splits;
  }
  return out;
}

Matrix permutation_null(const Matrix& x, const Vector& y, Family family,
                        const BartParams& params, int permutations, std::uint64_t seed,
                        Exec exec, bool allow_small) {
  if (permutations < (allow_small ? 1 : 50)) {
    throw InvalidArgument("BART permutation null needs at least 50 permutations");
  }
  const int n = static_cast<int>(y.size());
  Matrix null(permutations, x.cols());
  for_each_index(permutations, exec, [&](int i) {
    auto rng = make_rng(seed, "bart-permutation", static_cast<std::uint64_t>(i));
    const auto perm = random_permutation(n, rng);
    Vector shuffled(n);
    for (int k = 0; k < n; ++k) shuffled(k) = y(perm[static_cast<std::size_t>(k)]);
    BartParams fit_params = params;
    fit_params.store_trees = false;
    fit_params.seed = derive_seed(seed, "bart-permutation-fit", static_cast<std::uint64_t>(i));
    const auto post = fit_bart(x, shuffled, family, fit_params);
    null.row(i) = inclusion_proportions(post).values.transpose();
  });
  return null;
}

namespace {

void check_null(const Matrix& null, double alpha) {
  if (null.rows() < 1) throw InvalidArgument("empty permutation null");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must be in (0, 1)");
}

std::vector<double> column(const Matrix& m, Eigen::Index j) {
  return {m.col(j).data(), m.col(j).data() + m.rows()};
}

Vector column_means(const Matrix& null) { return null.colwise().mean().transpose(); }

Vector column_sds(const Matrix& null) {
  Vector sd = Vector::Zero(null.cols());
  if (null.rows() < 2) return sd;
  const Vector mean = column_means(null);
  for (Eigen::Index j = 0; j < null.cols(); ++j) {
    sd(j) = std::sqrt((null.col(j).array() - mean(j)).square().sum() /
                      static_cast<double>(null.rows() - 1));
  }
  return sd;
}

}  // namespace

Vector local_thresholds(const Matrix& null, double alpha) {
  check_null(null, alpha);
  Vector out(null.cols());
  for (Eigen::Index j = 0; j < null.cols(); ++j) {
    out(j) = stats::quantile(column(null, j), 1.0 - alpha);
  }
  return out;
}

double global_se_multiplier(const Matrix& null, double alpha) {
  check_null(null, alpha);
  const Vector mean = column_means(null);
  const Vector sd = column_sds(null);
  std::vector<double> needed(static_cast<std::size_t>(null.rows()),
                             -std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < null.rows(); ++i) {
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
      // A zero-SD column equals its mean in every row and never binds.
      if (sd(j) > 0.0) {
        needed[static_cast<std::size_t>(i)] =
            std::max(needed[static_cast<std::size_t>(i)], (null(i, j) - mean(j)) / sd(j));
      }
    }
  }
  std::sort(needed.begin(), needed.end());
  const auto rows = static_cast<double>(null.rows());
  const auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * rows - 1e-9));
  const double c = needed[std::clamp<std::size_t>(k, 1, needed.size()) - 1];
  return std::isfinite(c) ? c : 0.0;
}

double global_max_threshold(const Matrix& null, double alpha) {
  check_null(null, alpha);
  const Vector maxima = null.rowwise().maxCoeff();
  return stats::quantile({maxima.data(), maxima.data() + maxima.size()}, 1.0 - alpha);
}

namespace {

IndexSet above(const Vector& ip, const Vector& threshold) {
  IndexSet out;
  for (Eigen::Index j = 0; j < ip.size(); ++j) {
    if (ip(j) > threshold(j)) out.push_back(static_cast<int>(j));
  }
  return out;
}

void check_ip(const Vector& ip, const Matrix& null) {
  if (ip.size() != null.cols()) {
    throw InvalidArgument("inclusion proportions and null matrix disagree on p");
  }
}

}  // namespace

IndexSet select_local(const Vector& ip, const Matrix& null, double alpha) {
  check_ip(ip, null);
  return above(ip, local_thresholds(null, alpha));
}

IndexSet select_global_se(const Vector& ip, const Matrix& null, double alpha) {
  check_ip(ip, null);
  const double c = global_se_multiplier(null, alpha);
  return above(ip, column_means(null) + c * column_sds(null));
}

IndexSet select_global_max(const Vector& ip, const Matrix& null, double alpha) {
  check_ip(ip, null);
  return above(ip, Vector::Constant(ip.size(), global_max_threshold(null, alpha)));
}

void write_inclusion_csv(const std::filesystem::path& path, const Vector& ip,
                         const Matrix& null, const std::vector<std::string>& names,
                         double alpha) {
  check_ip(ip, null);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const Vector mean = column_means(null);
  const Vector sd = column_sds(null);
  const Vector local = local_thresholds(null, alpha);
  const double c = global_se_multiplier(null, alpha);
  const double gmax = global_max_threshold(null, alpha);
  out << "variable,name,inclusion,null_mean,null_sd,local_threshold,global_se_threshold,"
         "global_max_threshold\n";
  for (Eigen::Index j = 0; j < ip.size(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const std::string name = ju < names.size() ? names[ju] : std::to_string(j);
    out << j << ',' << csv::escape_field(name) << ',' << csv::format_double(ip(j)) << ','
        << csv::format_double(mean(j)) << ',' << csv::format_double(sd(j)) << ','
        << csv::format_double(local(j)) << ',' << csv::format_double(mean(j) + c * sd(j))
        << ',' << csv::format_double(gmax) << '\n';
  }
}

void write_null_csv(const std::filesystem::path& path, const Matrix& null,
                    const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  std::vector<std::string> header{"permutation"};
  for (Eigen::Index j = 0; j < null.cols(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    header.push_back(ju < names.size() ? names[ju] : std::to_string(j));
  }
  out << csv::join_record(header) << '\n';
  for (Eigen::Index i = 0; i < null.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < null.cols(); ++j) out << ',' << csv::format_double(null(i, j));
    out << '\n';
  }
}

}  // namespace varsel::bart
