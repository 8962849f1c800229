#pragma once

// Shared helpers for the unit and acceptance tests. Random matrices come from
// <random> rather than the library's NormalStream so the oracles stay
// independent of the code under test.

#include "covrecon/covariance.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace covrecon::testing {

inline Matrix random_gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = n01(rng);
  }
  return g;
}

inline Matrix random_orthogonal(std::mt19937_64& rng, Eigen::Index d) {
  Eigen::HouseholderQR<Matrix> qr(random_gaussian(rng, d, d));
  return qr.householderQ();
}

/// Q diag(eigenvalues) Q^T with a random orthogonal Q.
inline Matrix with_eigenvalues(std::mt19937_64& rng, const Vector& eigenvalues) {
  const Matrix q = random_orthogonal(rng, eigenvalues.size());
  Matrix m = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

/// Random SPD matrix with log-uniform spectrum spanning [1, kappa] times a
/// random scale; kappa itself is log-uniform on [10, 1e6].
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double log_kappa = std::log(10.0) + u(rng) * (std::log(1e6) - std::log(10.0));
  const double scale = std::exp(4.0 * u(rng) - 2.0);
  Vector ev(d);
  ev(0) = 1.0;
  ev(d - 1) = std::exp(-log_kappa);
  for (Eigen::Index k = 1; k + 1 < d; ++k) ev(k) = std::exp(-log_kappa * u(rng));
  return with_eigenvalues(rng, scale * ev);
}

/// Eigenvalues in descending order from Eigen's self-adjoint solver.
inline Vector oracle_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  Vector ev = es.eigenvalues().reverse();
  return ev;
}

inline double oracle_condition_number(const Matrix& m) {
  const Vector ev = oracle_eigenvalues(m);
  return ev(0) / ev(ev.size() - 1);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace covrecon::testing
