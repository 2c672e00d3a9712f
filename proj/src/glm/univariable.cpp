#include "varsel/glm/univariable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "varsel/common/error.hpp"
#include "varsel/common/stats.hpp"

namespace varsel::glm {

namespace {

UnivariableResult fit_gaussian(std::span<const double> x,
                               std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = stats::mean(x);
  const double my = stats::mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  UnivariableResult r;
  if (!(sxx > 0.0)) {
    r.std_error = std::numeric_limits<double>::infinity();
    return r;
  }
  r.coefficient = sxy / sxx;
  const double intercept = my - r.coefficient * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - intercept - r.coefficient * x[i];
    rss += e * e;
  }
  const double df = n - 2.0;
  r.std_error = std::sqrt(rss / df / sxx);
  if (r.std_error == 0.0) {
    r.p_value = 0.0;
  } else {
    r.p_value = stats::student_t_two_sided_p(r.coefficient / r.std_error, df);
  }
  return r;
}

UnivariableResult fit_logistic(std::span<const double> x,
                               std::span<const double> y) {
  const std::size_t n = x.size();
  double lo[2] = {std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  double hi[2] = {-std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  double cases = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = y[i] > 0.5 ? 1 : 0;
    cases += cls;
    lo[cls] = std::min(lo[cls], x[i]);
    hi[cls] = std::max(hi[cls], x[i]);
  }
  if (cases == 0.0 || cases == static_cast<double>(n)) {
    throw InvalidArgument("binary outcome has a single class");
  }

  UnivariableResult r;
  if (lo[0] == hi[0] && lo[1] == hi[1] && lo[0] == lo[1]) {
    r.std_error = std::numeric_limits<double>::infinity();
    return r;
  }
  // Complete or quasi-complete separation on a single predictor.
  if (hi[0] <= lo[1] || hi[1] <= lo[0]) {
    r.separated = true;
    r.coefficient = hi[0] <= lo[1] ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
    r.std_error = std::numeric_limits<double>::quiet_NaN();
    r.p_value = 0.0;
    return r;
  }

  const double prevalence = cases / static_cast<double>(n);
  double b0 = std::log(prevalence / (1.0 - prevalence));
  double b1 = 0.0;
  double i00 = 0.0, i01 = 0.0, i11 = 0.0;
  for (int it = 1; it <= kIrlsMaxIterations; ++it) {
    double u0 = 0.0, u1 = 0.0;
    i00 = i01 = i11 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = stats::expit(b0 + b1 * x[i]);
      const double w = p * (1.0 - p);
      u0 += y[i] - p;
      u1 += x[i] * (y[i] - p);
      i00 += w;
      i01 += w * x[i];
      i11 += w * x[i] * x[i];
    }
    const double det = i00 * i11 - i01 * i01;
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw NumericalError("logistic IRLS: singular information matrix");
    }
    const double d0 = (i11 * u0 - i01 * u1) / det;
    const double d1 = (i00 * u1 - i01 * u0) / det;
    b0 += d0;
    b1 += d1;
    if (std::max(std::abs(d0), std::abs(d1)) < kIrlsTolerance) {
      // Information at the converged estimate.
      i00 = i01 = i11 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = stats::expit(b0 + b1 * x[i]);
        const double w = p * (1.0 - p);
        i00 += w;
        i01 += w * x[i];
        i11 += w * x[i] * x[i];
      }
      r.coefficient = b1;
      r.std_error = std::sqrt(i00 / (i00 * i11 - i01 * i01));
      r.p_value = stats::normal_two_sided_p(b1 / r.std_error);
      r.iterations = it;
      return r;
    }
  }
  throw ConvergenceError("logistic IRLS did not converge in 50 iterations");
}

}  // namespace

UnivariableResult fit_univariable(std::span<const double> x,
                                  std::span<const double> y, Family family,
                                  int variable) {
  if (x.size() != y.size()) {
    throw InvalidArgument("fit_univariable: x and y lengths differ");
  }
  if (x.size() < 10) throw InvalidArgument("fit_univariable needs n >= 10");
  auto r = family == Family::binary ? fit_logistic(x, y) : fit_gaussian(x, y);
  r.variable = variable;
  return r;
}

std::vector<UnivariableResult> fit_univariable_all(const Matrix& x,
                                                   const Vector& y,
                                                   Family family, Exec exec) {
  const int p = static_cast<int>(x.cols());
  std::vector<UnivariableResult> out(static_cast<std::size_t>(p));
  std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
  for_each_index(p, exec, [&](int j) {
    std::span<const double> xs(x.col(j).data(), static_cast<std::size_t>(x.rows()));
    out[static_cast<std::size_t>(j)] = fit_univariable(xs, ys, family, j);
  });
  return out;
}

IndexSet bonferroni_select(std::span<const UnivariableResult> results,
                           double alpha, int p_total) {
  const int total = p_total > 0 ? p_total : static_cast<int>(results.size());
  const double threshold = alpha / static_cast<double>(total);
  IndexSet selected;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (results[k].p_value < threshold) {
      selected.push_back(results[k].variable >= 0 ? results[k].variable
                                                  : static_cast<int>(k));
    }
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace varsel::glm
