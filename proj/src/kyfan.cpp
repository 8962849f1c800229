#include "covrecon/kyfan.hpp"

#include "covrecon/errors.hpp"
#include "covrecon/recondition.hpp"
#include "covrecon/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace covrecon {

double ky_fan_norm_of_singular_values(Vector singular_values, const KyFanParams& params) {
  const Eigen::Index d = singular_values.size();
  if (!(params.p >= 1.0) || params.k < 1 || params.k > d) {
    std::ostringstream msg;
    msg << "Ky Fan norm needs p >= 1 and 1 <= k <= " << d << " (got p = " << params.p
        << ", k = " << params.k << ")";
    throw InvalidParamsError(msg.str());
  }
  singular_values = singular_values.cwiseAbs();
  std::sort(singular_values.begin(), singular_values.end(), std::greater<>());
  const auto top = singular_values.head(params.k).array();
  if (params.p == 1.0) return top.sum();
  return std::pow(top.pow(params.p).sum(), 1.0 / params.p);
}

double ky_fan_norm(const SymmetricMatrix& x, const KyFanParams& params) {
  return ky_fan_norm_of_singular_values(sym_eigendecompose(x).eigenvalues, params);
}

KyFanCondition me_kyfan_condition(const CovarianceMatrix& r, double kappa_max) {
  const double threshold = me_threshold(r, kappa_max);
  const Vector& lambda = r.spectrum().eigenvalues;
  const Eigen::Index d = lambda.size();
  Eigen::Index first_below = 0;
  while (first_below < d && lambda(first_below) > threshold) ++first_below;
  const Eigen::Index l = first_below + 1;
  const Eigen::Index bound = d - l + 1;
  const auto b = static_cast<double>(bound);
  return {threshold, l, bound, kappa_max >= b, kappa_max > b};
}

std::optional<long> smallest_kyfan_kappa(const CovarianceMatrix& r, bool strict) {
  const ConditionNumber kappa = r.condition_number();
  for (long k = 2; kappa.greater_than(static_cast<double>(k)); ++k) {
    const auto c = me_kyfan_condition(r, static_cast<double>(k));
    if (strict ? c.satisfied_strict : c.satisfied) return k;
    if (k > r.dim() + 1) break;  // bound <= d - 1, so k = d already satisfies
  }
  return std::nullopt;
}

namespace {

double trace_distance(const Matrix& a, const Matrix& b) {
  const Vector eig = sym_eigendecompose(SymmetricMatrix(a - b)).eigenvalues;
  return eig.cwiseAbs().sum();
}

Matrix random_orthogonal(NormalStream& rng, Eigen::Index d, double perturbation) {
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  }
  if (perturbation > 0.0) g = Matrix::Identity(d, d) + perturbation * g;
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  // Fix column signs so the factor is unique for a given g.
  const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (rr(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace

double me_trace_distance(const CovarianceMatrix& r, double kappa_max) {
  const auto me = min_eigenvalue(r, kappa_max);
  return trace_distance(r.entries(), me.result.entries());
}

double kyfan_minimizer_oracle(const CovarianceMatrix& r, double kappa_max,
                              const KyFanOracleOptions& options) {
  const auto reference = min_eigenvalue(r, kappa_max);
  const SpectralDecomposition& spec = r.spectrum();
  const Eigen::Index d = r.dim();
  const double threshold = reference.parameter;
  NormalStream rng(options.seed);

  double best = std::numeric_limits<double>::infinity();
  if (options.include_me_candidate) {
    best = trace_distance(r.entries(), reference.result.entries());
  }

  for (int trial = 0; trial < options.trials; ++trial) {
    // mu spans a factor e either side of T, with most mass near T.
    const double spread = (trial % 2 == 0) ? 0.05 : 1.0;
    const double mu = threshold * std::exp(spread * (2.0 * rng.uniform() - 1.0));
    const double top = kappa_max * mu;

    Vector values(d);
    const int strategy = trial % 4;
    if (strategy == 3) {
      // Arbitrary interior spectrum.
      for (Eigen::Index k = 0; k < d; ++k) values(k) = mu + (top - mu) * rng.uniform();
      std::sort(values.begin(), values.end(), std::greater<>());
    } else {
      for (Eigen::Index k = 0; k < d; ++k) values(k) = std::clamp(spec.eigenvalues(k), mu, top);
    }
    values(0) = top;
    values(d - 1) = mu;

    Matrix basis;
    switch (strategy) {
      case 0:
      case 3:
        basis = spec.eigenvectors;
        break;
      case 1:
        basis = spec.eigenvectors * random_orthogonal(rng, d, 0.05 * rng.uniform());
        break;
      default:
        basis = random_orthogonal(rng, d, 0.0);
        break;
    }
    const Matrix candidate = basis * values.asDiagonal() * basis.transpose();
    best = std::min(best, trace_distance(r.entries(), 0.5 * (candidate + candidate.transpose())));
  }
  return best;
}

}  // namespace covrecon
