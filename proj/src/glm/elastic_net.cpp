#include "varsel/glm/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "varsel/common/csv.hpp"
#include "varsel/common/error.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/common/stats.hpp"

namespace varsel::glm {

namespace {

constexpr double kProbClamp = 1e-5;
constexpr double kSaturatedDevRatio = 0.999;
constexpr double kMinAlphaForLambdaMax = 1e-3;

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void check_inputs(const Matrix& x, const Vector& y, Family family, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("elastic net: alpha must lie in [0, 1]");
  }
  if (x.rows() != y.size()) throw InvalidArgument("elastic net: x and y row counts differ");
  if (x.rows() < 2 || x.cols() < 1) throw InvalidArgument("elastic net: empty design");
  if (!x.allFinite() || !y.allFinite()) {
    throw InvalidArgument("elastic net: non-finite values in x or y");
  }
  if (family == Family::binary) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) != 0.0 && y(i) != 1.0) {
        throw InvalidArgument("elastic net: binary outcome must be 0/1");
      }
    }
  }
}

std::vector<double> resolve_grid(const Matrix& x, const Vector& y, double alpha,
                                 const PathOptions& options) {
  if (!options.lambda.empty()) {
    for (double l : options.lambda) {
      if (!(l > 0.0) || !std::isfinite(l)) {
        throw InvalidArgument("elastic net: lambda grid values must be positive and finite");
      }
    }
    return options.lambda;
  }
  const double ratio = options.min_ratio > 0.0
                           ? options.min_ratio
                           : (x.rows() > x.cols() ? 1e-4 : 1e-2);
  return lambda_grid(lambda_max(x, y, alpha), options.n_lambda, ratio);
}

/// Penalized weighted least squares by cyclic coordinate descent:
///   (1/2n) sum_i w_i (z_i - b0 - x_i'b)^2 + lambda((1-a)/2 |b|^2 + a |b|_1)
/// Unweighted problems work on the gradient g = X'(z - Xb)/n, kept current
/// with lazily computed Gram columns (O(p) per update, Gram built once per
/// path). Weighted problems change W at every IRLS step, so they keep the
/// residual instead and pay O(n) per update. The full gradient is recomputed
/// at every KKT pass.
class WeightedCd {
 public:
  WeightedCd(const Matrix& x, const Vector* weights, bool fit_intercept,
             double alpha, double tolerance)
      : x_(x), w_(weights), fit_intercept_(fit_intercept), alpha_(alpha),
        tol_(tolerance), n_(static_cast<double>(x.rows())),
        gram_(weights ? 0 : x.cols(), weights ? 0 : x.cols()),
        have_column_(static_cast<std::size_t>(x.cols()), 0) {}

  /// Binds the working response and refreshes everything that depends on
  /// the weights. `z` must outlive the following solve() calls.
  void reset(const Vector& z) {
    z_ = &z;
    if (w_) std::fill(have_column_.begin(), have_column_.end(), 0);
    diag_ = w_ ? Vector((x_.array().square().colwise() * w_->array()).colwise().sum().transpose() / n_)
               : Vector(x_.colwise().squaredNorm().transpose() / n_);
    if (fit_intercept_) {
      weight_mean_ = w_ ? w_->sum() / n_ : 1.0;
      weighted_col_mean_ = w_ ? Vector(x_.transpose() * *w_ / n_)
                              : Vector(x_.colwise().mean().transpose());
    }
  }

  /// Gradient at (beta, intercept) computed from the residual.
  const Vector& refresh_gradient(const Vector& beta, double intercept) {
    residual_ = *z_ - x_ * beta;
    residual_.array() -= intercept;
    if (w_) {
      const Vector wr = residual_.cwiseProduct(*w_);
      grad_ = x_.transpose() * wr / n_;
      weighted_residual_mean_ = wr.sum() / n_;
    } else {
      grad_ = x_.transpose() * residual_ / n_;
      weighted_residual_mean_ = residual_.sum() / n_;
    }
    return grad_;
  }

  /// Solves at one lambda. `strong` flags the screened set; variables outside
  /// it are held at zero until a KKT pass finds a violation. Returns the
  /// number of sweeps used.
  int solve(double lambda, Vector& beta, double& intercept,
            std::vector<char>& strong, int sweep_budget,
            const std::function<void(double)>& observer = {}) {
    const double l1 = lambda * alpha_;
    const double l2 = lambda * (1.0 - alpha_);
    int sweeps = 0;
    refresh_gradient(beta, intercept);
    ensure_gram(strong);
    auto sweep = [&](bool active_only) {
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < x_.cols(); ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (!strong[ju]) continue;
        if (active_only && beta(j) == 0.0) continue;
        const double vj = diag_(j);
        if (vj <= 0.0) continue;
        const double old = beta(j);
        const double gj =
            w_ ? x_.col(j).dot(residual_.cwiseProduct(*w_)) / n_ : grad_(j);
        const double updated = soft_threshold(gj + vj * old, l1) / (vj + l2);
        if (updated != old) {
          const double delta = updated - old;
          beta(j) = updated;
          if (w_) {
            residual_.noalias() -= delta * x_.col(j);
          } else {
            grad_.noalias() -= delta * gram_.col(j);
          }
          if (fit_intercept_) weighted_residual_mean_ -= delta * weighted_col_mean_(j);
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (fit_intercept_) {
        const double delta = weighted_residual_mean_ / weight_mean_;
        intercept += delta;
        if (w_) {
          residual_.array() -= delta;
        } else {
          grad_.noalias() -= delta * weighted_col_mean_;
        }
        weighted_residual_mean_ = 0.0;
        max_change = std::max(max_change, std::abs(delta));
      }
      ++sweeps;
      if (observer) observer(objective(beta, intercept, l1, l2));
      if (sweeps > sweep_budget) {
        throw ConvergenceError("coordinate descent exceeded its sweep budget at lambda = " +
                               std::to_string(lambda));
      }
      return max_change;
    };

    while (true) {
      if (sweep(false) < tol_) {
        refresh_gradient(beta, intercept);
        bool violated = false;
        for (Eigen::Index j = 0; j < x_.cols(); ++j) {
          const auto ju = static_cast<std::size_t>(j);
          if (strong[ju]) continue;
          if (std::abs(grad_(j)) > l1) {
            strong[ju] = 1;
            violated = true;
          }
        }
        if (!violated) return sweeps;
        ensure_gram(strong);
        continue;
      }
      while (sweep(true) >= tol_) {
      }
    }
  }

 private:
  /// Fills the Gram columns of every flagged variable that lacks one, in a
  /// single matrix product. Unweighted mode only.
  void ensure_gram(const std::vector<char>& strong) {
    if (w_) return;
    std::vector<int> missing;
    for (std::size_t j = 0; j < strong.size(); ++j) {
      if (strong[j] && !have_column_[j]) {
        missing.push_back(static_cast<int>(j));
        have_column_[j] = 1;
      }
    }
    if (missing.empty()) return;
    const Matrix block = x_(Eigen::all, missing);
    const Matrix products = x_.transpose() * block / n_;
    for (std::size_t k = 0; k < missing.size(); ++k) {
      gram_.col(missing[k]) = products.col(static_cast<Eigen::Index>(k));
    }
  }

  double objective(const Vector& beta, double intercept, double l1, double l2) const {
    Vector r = *z_ - x_ * beta;
    r.array() -= intercept;
    const double loss = w_ ? (w_->array() * r.array().square()).sum() / (2.0 * n_)
                           : r.squaredNorm() / (2.0 * n_);
    return loss + l2 / 2.0 * beta.squaredNorm() + l1 * beta.lpNorm<1>();
  }

  const Matrix& x_;
  const Vector* w_;
  const Vector* z_ = nullptr;
  bool fit_intercept_;
  double alpha_;
  double tol_;
  double n_;
  Matrix gram_;
  std::vector<char> have_column_;
  Vector diag_;
  Vector grad_;
  Vector residual_;  ///< z - b0 - Xb, unweighted
  Vector weighted_col_mean_;
  double weight_mean_ = 1.0;
  double weighted_residual_mean_ = 0.0;
};

/// Grid values at or above this bound give the null model exactly. Solving
/// there anyway can let rounding admit a coefficient of order 1e-17.
double null_model_bound(const Matrix& x, const Vector& y, double alpha) {
  return alpha >= kMinAlphaForLambdaMax ? lambda_max(x, y, alpha)
                                        : std::numeric_limits<double>::infinity();
}

std::vector<char> strong_set(const Vector& grad, const Vector& beta, double alpha,
                             double lambda, double previous_lambda) {
  const double cutoff = alpha * (2.0 * lambda - previous_lambda);
  std::vector<char> strong(static_cast<std::size_t>(grad.size()), 0);
  for (Eigen::Index j = 0; j < grad.size(); ++j) {
    strong[static_cast<std::size_t>(j)] =
        (beta(j) != 0.0 || std::abs(grad(j)) >= cutoff) ? 1 : 0;
  }
  return strong;
}

PenalizedFit gaussian_path(const Matrix& x, const Vector& y, double alpha,
                           const std::vector<double>& grid,
                           const PathOptions& options) {
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Matrix xc = x.rowwise() - x_mean;
  const Vector yc = y.array() - y_mean;

  PenalizedFit fit;
  fit.family = Family::continuous;
  fit.alpha = alpha;
  fit.lambda = grid;
  fit.coefficients = Matrix::Zero(x.cols(), static_cast<Eigen::Index>(grid.size()));
  fit.intercepts = Vector::Zero(static_cast<Eigen::Index>(grid.size()));

  WeightedCd cd(xc, nullptr, false, alpha, options.tolerance);
  cd.reset(yc);
  Vector beta = Vector::Zero(x.cols());
  double unused_intercept = 0.0;
  double previous = grid.front();
  const double bound = null_model_bound(x, y, alpha);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] >= bound && beta.isZero(0.0)) {
      fit.intercepts(static_cast<Eigen::Index>(k)) = y_mean;
      previous = grid[k];
      continue;
    }
    auto strong = strong_set(cd.refresh_gradient(beta, 0.0), beta, alpha, grid[k], previous);
    std::function<void(double)> observer;
    if (options.sweep_observer) {
      observer = [&, k](double value) { options.sweep_observer(static_cast<int>(k), value); };
    }
    cd.solve(grid[k], beta, unused_intercept, strong, options.max_sweeps, observer);
    fit.coefficients.col(static_cast<Eigen::Index>(k)) = beta;
    fit.intercepts(static_cast<Eigen::Index>(k)) = y_mean - x_mean.dot(beta);
    previous = grid[k];
  }
  fit.solved = static_cast<int>(grid.size());
  return fit;
}

double binomial_deviance(const Vector& y, const Vector& eta) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = std::clamp(stats::expit(eta(i)), kProbClamp, 1.0 - kProbClamp);
    dev -= 2.0 * (y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p));
  }
  return dev;
}

PenalizedFit binomial_path(const Matrix& x, const Vector& y, double alpha,
                           const std::vector<double>& grid,
                           const PathOptions& options) {
  const auto n = static_cast<double>(x.rows());
  const double ybar = y.mean();
  if (ybar <= 0.0 || ybar >= 1.0) {
    throw InvalidArgument("elastic net: binary outcome has a single class");
  }

  PenalizedFit fit;
  fit.family = Family::binary;
  fit.alpha = alpha;
  fit.lambda = grid;
  fit.coefficients = Matrix::Zero(x.cols(), static_cast<Eigen::Index>(grid.size()));
  fit.intercepts = Vector::Zero(static_cast<Eigen::Index>(grid.size()));

  Vector beta = Vector::Zero(x.cols());
  double intercept = std::log(ybar / (1.0 - ybar));
  const double null_dev =
      binomial_deviance(y, Vector::Constant(y.size(), intercept));

  Vector weights(y.size());
  Vector z(y.size());
  WeightedCd cd(x, &weights, true, alpha, options.tolerance);
  double previous = grid.front();

  const double bound = null_model_bound(x, y, alpha);
  std::size_t k = 0;
  for (; k < grid.size(); ++k) {
    const double lambda = grid[k];
    if (lambda >= bound && beta.isZero(0.0)) {
      fit.intercepts(static_cast<Eigen::Index>(k)) = intercept;
      previous = lambda;
      continue;
    }
    Vector eta = (x * beta).array() + intercept;
    Vector mu = eta.unaryExpr([](double e) { return stats::expit(e); });
    const Vector grad = x.transpose() * (y - mu) / n;
    auto strong = strong_set(grad, beta, alpha, lambda, previous);

    std::function<void(double)> observer;
    if (options.sweep_observer) {
      observer = [&, k](double value) { options.sweep_observer(static_cast<int>(k), value); };
    }
    int budget = options.max_sweeps;
    while (true) {
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double p = std::clamp(mu(i), kProbClamp, 1.0 - kProbClamp);
        weights(i) = p * (1.0 - p);
        z(i) = eta(i) + (y(i) - p) / weights(i);
      }
      cd.reset(z);
      const Vector beta_before = beta;
      const double intercept_before = intercept;
      budget -= cd.solve(lambda, beta, intercept, strong, budget, observer);
      const double change = std::max((beta - beta_before).cwiseAbs().maxCoeff(),
                                     std::abs(intercept - intercept_before));
      eta = (x * beta).array() + intercept;
      mu = eta.unaryExpr([](double e) { return stats::expit(e); });
      if (!eta.allFinite()) {
        throw NumericalError("elastic net: non-finite linear predictor");
      }
      if (change < options.tolerance) break;
    }

    fit.coefficients.col(static_cast<Eigen::Index>(k)) = beta;
    fit.intercepts(static_cast<Eigen::Index>(k)) = intercept;
    previous = lambda;
    // A saturated fit (near-separable data) has no meaningful path below it.
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

double PenalizedFit::lambda_min() const {
  if (index_min < 0) throw InvalidArgument("fit has no cross-validation summary");
  return lambda[static_cast<std::size_t>(index_min)];
}

double PenalizedFit::lambda_1se() const {
  if (index_1se < 0) throw InvalidArgument("fit has no cross-validation summary");
  return lambda[static_cast<std::size_t>(index_1se)];
}

double lambda_max(const Matrix& x, const Vector& y, double alpha) {
  const auto n = static_cast<double>(x.rows());
  const Vector centered = y.array() - y.mean();
  const double top = (x.transpose() * centered).cwiseAbs().maxCoeff();
  return top / (n * std::max(alpha, kMinAlphaForLambdaMax));
}

std::vector<double> lambda_grid(double lambda_max_value, int count, double min_ratio) {
  if (count < 1) throw InvalidArgument("lambda grid needs at least one value");
  if (!(lambda_max_value > 0.0)) {
    throw InvalidArgument("lambda_max is zero: outcome is uncorrelated with every column");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = count > 1 ? std::log(min_ratio) / (count - 1) : 0.0;
  for (int k = 0; k < count; ++k) {
    grid[static_cast<std::size_t>(k)] = lambda_max_value * std::exp(step * k);
  }
  return grid;
}

PenalizedFit fit_elastic_net_path(const Matrix& x, const Vector& y,
                                  Family family, double alpha,
                                  const PathOptions& options) {
  check_inputs(x, y, family, alpha);
  const auto grid = resolve_grid(x, y, alpha, options);
  return family == Family::binary ? binomial_path(x, y, alpha, grid, options)
                                  : gaussian_path(x, y, alpha, grid, options);
}

Folds make_folds(const Vector& y, Family family, int k, std::uint64_t seed) {
  const auto n = static_cast<int>(y.size());
  if (k < 3) throw InvalidArgument("cross-validation needs at least 3 folds");
  if (k > n) throw InvalidArgument("more folds than observations");
  auto rng = make_rng(seed, "cv-folds");
  Folds folds{std::vector<int>(static_cast<std::size_t>(n)), k};
  const auto perm = random_permutation(n, rng);
  for (int pos = 0; pos < n; ++pos) {
    folds.fold_of_row[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] = pos % k;
  }
  if (family != Family::binary) return folds;

  const double cases = y.sum();
  std::vector<double> fold_cases(static_cast<std::size_t>(k), 0.0);
  std::vector<double> fold_size(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < n; ++i) {
    const auto f = static_cast<std::size_t>(folds.fold_of_row[static_cast<std::size_t>(i)]);
    fold_cases[f] += y(i);
    fold_size[f] += 1.0;
  }
  bool single_class = false;
  for (std::size_t f = 0; f < fold_cases.size(); ++f) {
    const double train_cases = cases - fold_cases[f];
    const double train_size = n - fold_size[f];
    if (fold_cases[f] == 0.0 || fold_cases[f] == fold_size[f] || train_cases == 0.0 ||
        train_cases == train_size) {
      single_class = true;
    }
  }
  if (!single_class) return folds;

  // Stratified redraw: deal each class round-robin over shuffled rows.
  std::vector<int> order = random_permutation(n, rng);
  std::stable_partition(order.begin(), order.end(),
                        [&](int i) { return y(i) > 0.5; });
  for (int pos = 0; pos < n; ++pos) {
    folds.fold_of_row[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos % k;
  }
  return folds;
}

std::vector<double> holdout_loss(const PenalizedFit& path, const Matrix& x,
                                 const Vector& y) {
  const Matrix eta = (x * path.coefficients).rowwise() + path.intercepts.transpose();
  std::vector<double> loss(path.lambda.size());
  const auto n = static_cast<double>(y.size());
  for (Eigen::Index k = 0; k < eta.cols(); ++k) {
    if (path.family == Family::binary) {
      loss[static_cast<std::size_t>(k)] = binomial_deviance(y, eta.col(k)) / n;
    } else {
      loss[static_cast<std::size_t>(k)] = (y - eta.col(k)).squaredNorm() / n;
    }
  }
  return loss;
}

void summarize_cv(const std::vector<std::vector<double>>& fold_losses,
                  PenalizedFit& fit) {
  const std::size_t k = fold_losses.size();
  const std::size_t grid = fit.lambda.size();
  fit.cv_mean.assign(grid, 0.0);
  fit.cv_se.assign(grid, 0.0);
  for (std::size_t g = 0; g < grid; ++g) {
    std::vector<double> values(k);
    for (std::size_t f = 0; f < k; ++f) values[f] = fold_losses[f][g];
    fit.cv_mean[g] = stats::mean(values);
    fit.cv_se[g] = stats::sample_sd(values) / std::sqrt(static_cast<double>(k));
  }
  // First minimum = largest lambda among ties.
  fit.index_min = static_cast<int>(
      std::min_element(fit.cv_mean.begin(), fit.cv_mean.end()) - fit.cv_mean.begin());
  const double bound = fit.cv_mean[static_cast<std::size_t>(fit.index_min)] +
                       fit.cv_se[static_cast<std::size_t>(fit.index_min)];
  fit.index_1se = fit.index_min;
  for (int g = 0; g <= fit.index_min; ++g) {
    if (fit.cv_mean[static_cast<std::size_t>(g)] <= bound) {
      fit.index_1se = g;
      break;
    }
  }
}

PenalizedFit cross_validate(const Matrix& x, const Vector& y, Family family,
                            double alpha, const Folds& folds,
                            const PathOptions& options, Exec exec) {
  check_inputs(x, y, family, alpha);
  if (static_cast<Eigen::Index>(folds.fold_of_row.size()) != y.size()) {
    throw InvalidArgument("fold assignment does not match the data");
  }
  PathOptions shared = options;
  shared.lambda = resolve_grid(x, y, alpha, options);
  PenalizedFit fit = fit_elastic_net_path(x, y, family, alpha, shared);

  std::vector<std::vector<double>> losses(static_cast<std::size_t>(folds.count));
  for_each_index(folds.count, exec, [&](int f) {
    std::vector<int> train;
    std::vector<int> test;
    for (std::size_t i = 0; i < folds.fold_of_row.size(); ++i) {
      (folds.fold_of_row[i] == f ? test : train).push_back(static_cast<int>(i));
    }
    const auto path = fit_elastic_net_path(select_rows(x, train), y(train), family,
                                           alpha, shared);
    losses[static_cast<std::size_t>(f)] = holdout_loss(path, select_rows(x, test), y(test));
  });
  summarize_cv(losses, fit);
  return fit;
}

PenalizedFit cross_validate(const Matrix& x, const Vector& y, Family family,
                            double alpha, int folds, std::uint64_t seed,
                            const PathOptions& options, Exec exec) {
  return cross_validate(x, y, family, alpha, make_folds(y, family, folds, seed),
                        options, exec);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> alphas;
  for (int k = 1; k <= 19; ++k) alphas.push_back(0.05 * k);
  return alphas;
}

AlphaSearch grid_search_alpha(const Matrix& x, const Vector& y, Family family,
                              const std::vector<double>& alphas,
                              const Folds& folds, const PathOptions& options,
                              Exec exec) {
  if (alphas.empty()) throw InvalidArgument("alpha grid is empty");
  std::vector<PenalizedFit> fits(alphas.size());
  for_each_index(static_cast<int>(alphas.size()), exec, [&](int a) {
    fits[static_cast<std::size_t>(a)] =
        cross_validate(x, y, family, alphas[static_cast<std::size_t>(a)], folds,
                       options, Exec::serial);
  });

  AlphaSearch out;
  out.alphas = alphas;
  std::size_t best = 0;
  for (std::size_t a = 0; a < fits.size(); ++a) {
    const auto& f = fits[a];
    out.best_cv_per_alpha.push_back(f.cv_mean[static_cast<std::size_t>(f.index_min)]);
    if (a == 0) continue;
    const auto& b = fits[best];
    const double cv_a = out.best_cv_per_alpha[a];
    const double cv_b = out.best_cv_per_alpha[best];
    const bool better =
        cv_a < cv_b ||
        (cv_a == cv_b && (f.lambda_min() > b.lambda_min() ||
                          (f.lambda_min() == b.lambda_min() && alphas[a] < alphas[best])));
    if (better) best = a;
  }
  out.best_alpha = alphas[best];
  out.fit = std::move(fits[best]);
  return out;
}

IndexSet nonzero_at(const PenalizedFit& fit, int index) {
  if (index < 0 || index >= fit.coefficients.cols()) {
    throw InvalidArgument("lambda index out of range");
  }
  IndexSet out;
  for (Eigen::Index j = 0; j < fit.coefficients.rows(); ++j) {
    if (fit.coefficients(j, index) != 0.0) out.push_back(static_cast<int>(j));
  }
  return out;
}

IndexSet selected_variables(const PenalizedFit& fit, LambdaRule rule) {
  if (!fit.has_cv()) throw InvalidArgument("selected_variables needs a cross-validated fit");
  return nonzero_at(fit, rule == LambdaRule::min ? fit.index_min : fit.index_1se);
}

void write_path_csv(const std::filesystem::path& path, const PenalizedFit& fit,
                    const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "variable";
  for (double l : fit.lambda) out << ',' << csv::format_double(l);
  out << '\n';
  for (Eigen::Index j = 0; j < fit.coefficients.rows(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    out << csv::escape_field(ju < names.size() ? names[ju] : std::to_string(j));
    for (Eigen::Index k = 0; k < fit.coefficients.cols(); ++k) {
      out << ',' << csv::format_double(fit.coefficients(j, k));
    }
    out << '\n';
  }
}

}  // namespace varsel::glm
