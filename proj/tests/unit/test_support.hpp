#pragma once

// Shared fixtures and independent oracles for the unit tests. Nothing here
// calls into the code paths under test.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace varsel::testing {

inline Eigen::MatrixXd random_normal_matrix(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = g(rng);
  }
  return m;
}

inline Eigen::VectorXd random_normal_vector(int n, std::uint64_t seed) {
  return random_normal_matrix(n, 1, seed).col(0);
}

/// Columns centered and scaled to sample SD 1.
inline Eigen::MatrixXd standardize_columns(Eigen::MatrixXd m) {
  const double n = static_cast<double>(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    m.col(j).array() -= m.col(j).mean();
    m.col(j) /= std::sqrt(m.col(j).squaredNorm() / (n - 1.0));
  }
  return m;
}

/// Design with mean-zero, mutually orthogonal columns and x_j'x_j = n.
inline Eigen::MatrixXd orthonormal_design(int n, int p, std::uint64_t seed) {
  Eigen::MatrixXd a(n, p + 1);
  a.col(0).setOnes();
  a.rightCols(p) = random_normal_matrix(n, p, seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p + 1);
  return q.rightCols(p) * std::sqrt(static_cast<double>(n));
}

/// Brute-force average ranks: rank = 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> brute_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) less += 1;
      if (v == x[i]) equal += 1;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

inline double spearman_oracle(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
  return pearson(brute_ranks(column(m, a)), brute_ranks(column(m, b)));
}

/// Pearson-to-Spearman relation for a bivariate normal pair.
inline double gaussian_spearman(double rho) {
  return 6.0 / M_PI * std::asin(rho / 2.0);
}

/// Unpenalized OLS with intercept via QR; returns slopes only.
inline Eigen::VectorXd ols_slopes(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  Eigen::VectorXd b = a.colPivHouseholderQr().solve(y);
  return b.tail(x.cols());
}

/// Plain Newton-Raphson logistic regression with intercept; returns slopes.
inline Eigen::VectorXd logistic_slopes(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::MatrixXd a(n, p + 1);
  a.col(0).setOnes();
  a.rightCols(p) = x;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd mu = (a * b).unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    Eigen::MatrixXd h = a.transpose() * w.asDiagonal() * a;
    Eigen::VectorXd step = h.ldlt().solve(a.transpose() * (y - mu));
    b += step;
    if (step.cwiseAbs().maxCoeff() < 1e-12) break;
  }
  return b.tail(p);
}

}  // namespace varsel::testing
