#include "varsel/sgl/sgl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "varsel/common/error.hpp"
#include "varsel/common/stats.hpp"

namespace varsel::sgl {

namespace {

constexpr double kSaturatedDevRatio = 0.999;
constexpr double kMinWeight = 1e-5;

Vector soft_threshold(const Vector& z, double gamma) {
  return z.unaryExpr([gamma](double v) {
    return v > gamma ? v - gamma : (v < -gamma ? v + gamma : 0.0);
  });
}

double soft_threshold(double z, double gamma) {
  return z > gamma ? z - gamma : (z < -gamma ? z + gamma : 0.0);
}

void check_inputs(const Matrix& x, const Vector& y, Family family) {
  if (x.rows() != y.size()) throw InvalidArgument("sparse group lasso: x and y row counts differ");
  if (x.rows() < 2 || x.cols() < 1) throw InvalidArgument("sparse group lasso: empty design");
  if (!x.allFinite() || !y.allFinite()) {
    throw InvalidArgument("sparse group lasso: non-finite values in x or y");
  }
  if (family == Family::binary) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) != 0.0 && y(i) != 1.0) {
        throw InvalidArgument("sparse group lasso: binary outcome must be 0/1");
      }
    }
    const double ybar = y.mean();
    if (ybar <= 0.0 || ybar >= 1.0) {
      throw InvalidArgument("sparse group lasso: binary outcome has a single class");
    }
  }
}

/// Lambda at which a group with null-model gradient g just becomes zero:
/// the root of ||S(g, a*lambda)|| = (1 - a) * lambda * w.
double group_entry_lambda(const Vector& g, double mixing, double weight) {
  const double top = g.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0.0;
  if (mixing >= 1.0) return top;
  if (mixing <= 0.0) return g.norm() / weight;
  double lo = 0.0;
  double hi = top / mixing;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (soft_threshold(g, mixing * mid).norm() > (1.0 - mixing) * mid * weight) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

struct Group {
  std::vector<int> members;
  double weight = 1.0;
  Matrix gram;          ///< curvature block of the quadratic loss
  double lipschitz = 0.0;
};

/// Blockwise descent on (1/2n) sum_i w_i (z_i - b0 - x_i'b)^2 + penalty.
/// Tracks the gradient through the weighted Gram matrix and recomputes it
/// from residuals before every full sweep.
class BlockSolver {
 public:
  BlockSolver(const Matrix& x, bool fit_intercept, const GroupedPenaltySpec& spec,
              const SglOptions& options)
      : x_(x), fit_intercept_(fit_intercept), mixing_(spec.mixing), options_(options),
        n_(static_cast<double>(x.rows())) {
    const auto weights = spec.resolved_weights();
    for (const auto& members : spec.groups.groups()) {
      Group g;
      g.members = members;
      g.weight = weights[groups_.size()];
      groups_.push_back(std::move(g));
    }
    set_weights(Vector::Ones(x.rows()));
  }

  /// Observation weights of the quadratic; rebuilds the Gram blocks.
  void set_weights(const Vector& w) {
    w_ = w;
    w_mean_ = w.mean();
    const Matrix xw = x_.array().colwise() * w.array().sqrt();
    gram_ = xw.transpose() * xw / n_;
    col_mean_ = x_.transpose() * w / n_;
    for (auto& g : groups_) {
      g.gram = gram_(g.members, g.members);
      if (g.members.size() == 1) {
        g.lipschitz = g.gram(0, 0);
      } else {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(g.gram, Eigen::EigenvaluesOnly);
        g.lipschitz = eig.eigenvalues().maxCoeff();
      }
    }
  }

  void bind(const Vector& z) { z_ = &z; }

  /// Returns block sweeps used.
  int solve(double lambda, Vector& beta, double& intercept, int sweep_budget,
            const std::function<void(double)>& observer = {}) {
    int sweeps = 0;
    auto sweep = [&](bool active_only) {
      double max_change = 0.0;
      for (const auto& g : groups_) {
        if (active_only && is_zero(beta, g)) continue;
        max_change = std::max(max_change, update_group(g, lambda, beta));
      }
      if (fit_intercept_) {
        const double delta = residual_mean_ / w_mean_;
        intercept += delta;
        grad_.noalias() -= delta * col_mean_;
        residual_mean_ = 0.0;
        max_change = std::max(max_change, std::abs(delta));
      }
      if (observer) observer(objective(lambda, beta, intercept));
      if (++sweeps > sweep_budget) {
        throw ConvergenceError("sparse group lasso: no convergence after " +
                               std::to_string(sweep_budget) + " block sweeps at lambda = " +
                               std::to_string(lambda) + " (last max change " +
                               std::to_string(max_change) + ")");
      }
      return max_change;
    };
    while (true) {
      refresh_gradient(beta, intercept);
      if (sweep(false) < options_.tolerance) return sweeps;
      while (sweep(true) >= options_.tolerance) {
      }
    }
  }

 private:
  static bool is_zero(const Vector& beta, const Group& g) {
    for (int j : g.members) {
      if (beta(j) != 0.0) return false;
    }
    return true;
  }

  double objective(double lambda, const Vector& beta, double intercept) const {
    Vector r = *z_ - x_ * beta;
    r.array() -= intercept;
    double penalty = 0.0;
    for (const auto& g : groups_) {
      const Vector b = beta(g.members);
      penalty += mixing_ * lambda * b.lpNorm<1>() + (1.0 - mixing_) * lambda * g.weight * b.norm();
    }
    return w_.dot(r.cwiseAbs2()) / (2.0 * n_) + penalty;
  }

  void refresh_gradient(const Vector& beta, double intercept) {
    Vector r = *z_ - x_ * beta;
    r.array() -= intercept;
    const Vector wr = w_.cwiseProduct(r);
    grad_ = x_.transpose() * wr / n_;
    residual_mean_ = wr.mean();
  }

  /// Minimizes over one group with the rest fixed; returns max |change|.
  double update_group(const Group& g, double lambda, Vector& beta) {
    const double l1 = mixing_ * lambda;
    const double lg = (1.0 - mixing_) * lambda * g.weight;
    const Vector old = beta(g.members);
    // Correlation of the group with the residual that excludes the group.
    const Vector c = grad_(g.members) + g.gram * old;
    Vector updated;
    if (soft_threshold(c, l1).norm() <= lg) {
      updated = Vector::Zero(c.size());
    } else if (g.members.size() == 1) {
      updated = Vector::Constant(1, soft_threshold(c(0), l1 + lg) / g.gram(0, 0));
    } else {
      updated = prox_gradient(g, c, l1, lg, old);
    }
    const Vector delta = updated - old;
    if (delta.isZero(0.0)) return 0.0;
    beta(g.members) = updated;
    grad_.noalias() -= gram_(Eigen::all, g.members) * delta;
    if (fit_intercept_) residual_mean_ -= col_mean_(g.members).dot(delta);
    return delta.cwiseAbs().maxCoeff();
  }

  /// Proximal gradient with step 1/L on
  ///   0.5 b'Hb - c'b + l1 ||b||_1 + lg ||b||_2
  /// until the minimum-norm subgradient falls below the inner tolerance.
  Vector prox_gradient(const Group& g, const Vector& c, double l1, double lg,
                       Vector b) const {
    const double step = 1.0 / g.lipschitz;
    for (int it = 0; it < options_.max_inner_iterations; ++it) {
      const Vector u = b - step * (g.gram * b - c);
      const Vector v = soft_threshold(u, step * l1);
      const double norm = v.norm();
      b = norm > 0.0 ? Vector(v * std::max(0.0, 1.0 - step * lg / norm))
                     : Vector::Zero(v.size());
      if (subgradient_residual(g, c, l1, lg, b) < options_.inner_tolerance) return b;
    }
    throw ConvergenceError("sparse group lasso: group subproblem did not converge");
  }

  static double subgradient_residual(const Group& g, const Vector& c, double l1,
                                     double lg, const Vector& b) {
    const Vector grad = g.gram * b - c;
    const double norm = b.norm();
    if (norm == 0.0) {
      return std::max(0.0, soft_threshold(grad, l1).norm() - lg);
    }
    double worst = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const double group_term = lg * b(j) / norm;
      double r;
      if (b(j) != 0.0) {
        r = grad(j) + group_term + (b(j) > 0 ? l1 : -l1);
      } else {
        r = soft_threshold(grad(j), l1);
      }
      worst = std::max(worst, std::abs(r));
    }
    return worst;
  }

  const Matrix& x_;
  const Vector* z_ = nullptr;
  bool fit_intercept_;
  double mixing_;
  const SglOptions& options_;
  double n_;
  Vector w_;
  double w_mean_ = 1.0;
  Matrix gram_;
  Vector col_mean_;
  Vector grad_;
  double residual_mean_ = 0.0;
  std::vector<Group> groups_;
};

double binomial_deviance(const Vector& y, const Vector& eta) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = std::clamp(stats::expit(eta(i)), 1e-5, 1.0 - 1e-5);
    dev -= 2.0 * (y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p));
  }
  return dev;
}

std::vector<double> resolve_grid(const Matrix& x, const Vector& y,
                                 const GroupedPenaltySpec& spec,
                                 const SglOptions& options) {
  if (!options.lambda.empty()) {
    for (double l : options.lambda) {
      if (!(l > 0.0) || !std::isfinite(l)) {
        throw InvalidArgument("sparse group lasso: lambda values must be positive and finite");
      }
    }
    return options.lambda;
  }
  const double ratio = options.min_ratio > 0.0 ? options.min_ratio
                                               : (x.rows() > x.cols() ? 1e-4 : 1e-2);
  return glm::lambda_grid(sgl_lambda_max(x, y, spec), options.n_lambda, ratio);
}

std::function<void(double)> observer_for(const SglOptions& options, std::size_t k) {
  if (!options.sweep_observer) return {};
  return [&options, k](double value) { options.sweep_observer(static_cast<int>(k), value); };
}

glm::PenalizedFit empty_fit(Family family, double mixing, const std::vector<double>& grid,
                            Eigen::Index p) {
  glm::PenalizedFit fit;
  fit.family = family;
  fit.alpha = mixing;
  fit.lambda = grid;
  fit.coefficients = Matrix::Zero(p, static_cast<Eigen::Index>(grid.size()));
  fit.intercepts = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
  return fit;
}

glm::PenalizedFit gaussian_path(const Matrix& x, const Vector& y,
                                const GroupedPenaltySpec& spec,
                                const std::vector<double>& grid,
                                const SglOptions& options) {
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Matrix xc = x.rowwise() - x_mean;
  const Vector yc = y.array() - y_mean;
  auto fit = empty_fit(Family::continuous, spec.mixing, grid, x.cols());

  BlockSolver solver(xc, false, spec, options);
  solver.bind(yc);
  Vector beta = Vector::Zero(x.cols());
  double unused = 0.0;
  const double bound = sgl_lambda_max(x, y, spec);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (!(grid[k] >= bound && beta.isZero(0.0))) {
      solver.solve(grid[k], beta, unused, options.max_sweeps, observer_for(options, k));
    }
    fit.coefficients.col(kk) = beta;
    fit.intercepts(kk) = y_mean - x_mean.dot(beta);
  }
  fit.solved = static_cast<int>(grid.size());
  return fit;
}

glm::PenalizedFit binomial_path(const Matrix& x, const Vector& y,
                                const GroupedPenaltySpec& spec,
                                const std::vector<double>& grid,
                                const SglOptions& options) {
  const double ybar = y.mean();
  auto fit = empty_fit(Family::binary, spec.mixing, grid, x.cols());
  BlockSolver solver(x, true, spec, options);
  Vector beta = Vector::Zero(x.cols());
  double intercept = std::log(ybar / (1.0 - ybar));
  const double null_dev = binomial_deviance(y, Vector::Constant(y.size(), intercept));
  const double bound = sgl_lambda_max(x, y, spec);
  Vector z(y.size());
  Vector w(y.size());

  std::size_t k = 0;
  for (; k < grid.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    Vector eta = (x * beta).array() + intercept;
    if (!(grid[k] >= bound && beta.isZero(0.0))) {
      int budget = options.max_sweeps;
      while (true) {
        // IRLS: weighted quadratic approximation at the current fit.
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          const double prob = stats::expit(eta(i));
          w(i) = std::max(prob * (1.0 - prob), kMinWeight);
          z(i) = eta(i) + (y(i) - prob) / w(i);
        }
        solver.set_weights(w);
        solver.bind(z);
        const Vector beta_before = beta;
        const double intercept_before = intercept;
        budget -= solver.solve(grid[k], beta, intercept, budget, observer_for(options, k));
        eta = (x * beta).array() + intercept;
        if (!eta.allFinite()) {
          throw NumericalError("sparse group lasso: non-finite linear predictor");
        }
        const double change = std::max((beta - beta_before).cwiseAbs().maxCoeff(),
                                       std::abs(intercept - intercept_before));
        if (change < options.tolerance) break;
      }
    }
    fit.coefficients.col(kk) = beta;
    fit.intercepts(kk) = intercept;
    if (1.0 - binomial_deviance(y, eta) / null_dev > kSaturatedDevRatio) {
      ++k;
      break;
    }
  }
  fit.solved = static_cast<int>(k);
  for (std::size_t rest = k; rest < grid.size(); ++rest) {
    fit.coefficients.col(static_cast<Eigen::Index>(rest)) = beta;
    fit.intercepts(static_cast<Eigen::Index>(rest)) = intercept;
  }
  return fit;
}

}  // namespace

void GroupedPenaltySpec::validate(int p) const {
  if (static_cast<int>(groups.group_of.size()) != p) {
    throw InvalidArgument("group assignment covers " + std::to_string(groups.group_of.size()) +
                          " variables, expected " + std::to_string(p));
  }
  std::vector<int> size(static_cast<std::size_t>(std::max(groups.count, 0)), 0);
  for (int g : groups.group_of) {
    if (g < 0 || g >= groups.count) throw InvalidArgument("group id out of range");
    ++size[static_cast<std::size_t>(g)];
  }
  for (int s : size) {
    if (s == 0) throw InvalidArgument("group assignment has an empty group");
  }
  if (!(mixing >= 0.0 && mixing <= 1.0)) throw InvalidArgument("mixing must lie in [0, 1]");
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) != groups.count) {
      throw InvalidArgument("need one weight per group");
    }
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("group weights must be positive");
    }
  }
}

std::vector<double> GroupedPenaltySpec::resolved_weights() const {
  if (!weights.empty()) return weights;
  std::vector<double> out(static_cast<std::size_t>(groups.count), 0.0);
  for (int g : groups.group_of) out[static_cast<std::size_t>(g)] += 1.0;
  for (double& w : out) w = std::sqrt(w);
  return out;
}

cluster::ClusterAssignment singleton_groups(int p) {
  cluster::ClusterAssignment a;
  a.count = p;
  a.group_of.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) a.group_of[static_cast<std::size_t>(j)] = j;
  return a;
}

double sgl_lambda_max(const Matrix& x, const Vector& y, const GroupedPenaltySpec& spec) {
  const auto n = static_cast<double>(x.rows());
  const Vector centered = y.array() - y.mean();
  const Vector g = x.transpose() * centered / n;
  const auto weights = spec.resolved_weights();
  double top = 0.0;
  const auto groups = spec.groups.groups();
  for (std::size_t k = 0; k < groups.size(); ++k) {
    top = std::max(top, group_entry_lambda(g(groups[k]), spec.mixing, weights[k]));
  }
  return top;
}

glm::PenalizedFit fit_sparse_group_lasso(const Matrix& x, const Vector& y, Family family,
                                         const GroupedPenaltySpec& spec,
                                         const SglOptions& options) {
  check_inputs(x, y, family);
  spec.validate(static_cast<int>(x.cols()));
  const auto grid = resolve_grid(x, y, spec, options);
  return family == Family::binary ? binomial_path(x, y, spec, grid, options)
                                  : gaussian_path(x, y, spec, grid, options);
}

glm::PenalizedFit sgl_cross_validate(const Matrix& x, const Vector& y, Family family,
                                     const GroupedPenaltySpec& spec, const glm::Folds& folds,
                                     const SglOptions& options, Exec exec) {
  check_inputs(x, y, family);
  spec.validate(static_cast<int>(x.cols()));
  if (static_cast<Eigen::Index>(folds.fold_of_row.size()) != y.size()) {
    throw InvalidArgument("fold assignment does not match the data");
  }
  SglOptions shared = options;
  shared.lambda = resolve_grid(x, y, spec, options);
  auto fit = fit_sparse_group_lasso(x, y, family, spec, shared);

  std::vector<std::vector<double>> losses(static_cast<std::size_t>(folds.count));
  for_each_index(folds.count, exec, [&](int f) {
    std::vector<int> train;
    std::vector<int> test;
    for (std::size_t i = 0; i < folds.fold_of_row.size(); ++i) {
      (folds.fold_of_row[i] == f ? test : train).push_back(static_cast<int>(i));
    }
    const auto path = fit_sparse_group_lasso(select_rows(x, train), y(train), family, spec, shared);
    losses[static_cast<std::size_t>(f)] = glm::holdout_loss(path, select_rows(x, test), y(test));
  });
  glm::summarize_cv(losses, fit);
  return fit;
}

IndexSet sgl_selected_variables(const glm::PenalizedFit& fit) {
  return glm::selected_variables(fit, glm::LambdaRule::min);
}

}  // namespace varsel::sgl
