#include "covrecon/recondition.hpp"

#include "covrecon/errors.hpp"

#include <cmath>
#include <sstream>

namespace covrecon {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::kRidgeRegression:
      return "RR";
    case Method::kMinimumEigenvalue:
      return "ME";
    case Method::kVarianceInflation:
      return "MVI";
  }
  return "?";
}

namespace {

void check_target(const ConditionNumber& kappa, double kappa_max) {
  if (!std::isfinite(kappa_max) || !(kappa_max > 1.0)) {
    std::ostringstream msg;
    msg << "target condition number must be finite and > 1, got " << kappa_max;
    throw InvalidTargetError(msg.str());
  }
  if (!kappa.greater_than(kappa_max)) {
    std::ostringstream msg;
    msg << "target condition number " << kappa_max
        << " is not below the current condition number " << kappa
        << "; nothing to recondition";
    throw NoOpRequestError(msg.str());
  }
}

// Correlations with a unit diagonal; rows and columns of zero-variance
// variables (allowed in a singular input) are set to zero off the diagonal.
SymmetricMatrix correlations_of(const CovarianceMatrix& r, const Vector& sigma) {
  const Eigen::Index d = r.dim();
  Matrix c(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j) {
        c(i, j) = 1.0;
      } else if (sigma(i) > 0.0 && sigma(j) > 0.0) {
        c(i, j) = r(i, j) / (sigma(i) * sigma(j));
      } else {
        c(i, j) = 0.0;
      }
    }
  }
  return SymmetricMatrix(std::move(c));
}

ReconditionReport make_report(Method method, const CovarianceMatrix& before,
                              double parameter, Vector gamma, CovarianceMatrix after,
                              double kappa_after) {
  Vector sigma_before = before.variances().cwiseMax(0.0).cwiseSqrt();
  Vector sigma_after = after.variances().cwiseMax(0.0).cwiseSqrt();
  Matrix delta = correlation_change_report(correlations_of(before, sigma_before),
                                           correlations_of(after, sigma_after));
  return ReconditionReport{method,
                           before.condition_number(),
                           kappa_after,
                           parameter,
                           std::move(gamma),
                           std::move(after),
                           std::move(sigma_before),
                           std::move(sigma_after),
                           std::move(delta)};
}

}  // namespace

double rr_delta(double lambda_1, double lambda_d, double kappa_max) {
  if (lambda_d < 0.0 || lambda_1 < lambda_d) {
    throw InvalidParamsError("rr_delta needs lambda_1 >= lambda_d >= 0");
  }
  const ConditionNumber kappa = lambda_d == 0.0
                                    ? ConditionNumber::infinite()
                                    : ConditionNumber::finite(lambda_1 / lambda_d);
  check_target(kappa, kappa_max);
  return (lambda_1 - lambda_d * kappa_max) / (kappa_max - 1.0);
}

ReconditionReport ridge_regression(const CovarianceMatrix& r, double kappa_max) {
  const SpectralDecomposition& spec = r.spectrum();
  const double delta = rr_delta(spec.largest(), spec.smallest(), kappa_max);

  Matrix shifted = r.entries();
  shifted.diagonal().array() += delta;
  SpectralDecomposition shifted_spec = spec;
  shifted_spec.eigenvalues.array() += delta;
  const double kappa_after =
      shifted_spec.largest() / shifted_spec.smallest();

  auto result = CovarianceMatrix::with_spectrum(SymmetricMatrix(std::move(shifted)),
                                                std::move(shifted_spec));
  return make_report(Method::kRidgeRegression, r, delta, Vector::Zero(r.dim()),
                     std::move(result), kappa_after);
}

double me_threshold(const CovarianceMatrix& r, double kappa_max) {
  check_target(r.condition_number(), kappa_max);
  return r.spectrum().largest() / kappa_max;
}

ReconditionReport min_eigenvalue(const CovarianceMatrix& r, double kappa_max) {
  const SpectralDecomposition& spec = r.spectrum();
  const double threshold = me_threshold(r, kappa_max);
  const Eigen::Index d = r.dim();
  const Vector gamma = (threshold - spec.eigenvalues.array()).cwiseMax(0.0).matrix();

  // R + V Gamma V^T, touching only the modified eigen-directions.
  Matrix updated = r.entries();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (gamma(k) > 0.0) {
      const auto v = spec.eigenvectors.col(k);
      updated.noalias() += gamma(k) * v * v.transpose();
    }
  }
  SpectralDecomposition new_spec = spec;
  new_spec.eigenvalues += gamma;
  const double kappa_after = new_spec.largest() / new_spec.eigenvalues.minCoeff();

  auto result = CovarianceMatrix::with_spectrum(SymmetricMatrix(std::move(updated)),
                                                std::move(new_spec));
  return make_report(Method::kMinimumEigenvalue, r, threshold, gamma,
                     std::move(result), kappa_after);
}

ReconditionReport mvi(const CovarianceMatrix& r, double alpha) {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) {
    std::ostringstream msg;
    msg << "inflation constant must be positive, got " << alpha;
    throw InvalidTargetError(msg.str());
  }
  if (!r.is_positive_definite()) {
    throw SingularMatrixError(
        "variance inflation needs an invertible covariance matrix; this one is singular");
  }
  const double a2 = alpha * alpha;
  SpectralDecomposition scaled_spec = r.spectrum();
  scaled_spec.eigenvalues *= a2;
  const double kappa_after = r.condition_number().value();
  auto result = CovarianceMatrix::with_spectrum(SymmetricMatrix(a2 * r.entries()),
                                                std::move(scaled_spec));
  return make_report(Method::kVarianceInflation, r, alpha, Vector::Zero(r.dim()),
                     std::move(result), kappa_after);
}

Vector rr_sigma_update(const Vector& sigma, double delta) {
  if (!(delta >= 0.0)) throw InvalidTargetError("ridge shift must be non-negative");
  return (sigma.array().square() + delta).sqrt().matrix();
}

Vector me_sigma_update(const CovarianceMatrix& r, const SpectralDecomposition& decomp,
                       const Vector& gamma) {
  if (decomp.dim() != r.dim() || gamma.size() != r.dim()) {
    throw DimensionMismatch("me_sigma_update: inconsistent dimensions");
  }
  const Vector increments = decomp.eigenvectors.array().square().matrix() * gamma;
  return (r.variances() + increments).cwiseSqrt();
}

Vector equivalent_inflation_factor(const Vector& sigma_before, const Vector& sigma_after) {
  if (sigma_before.size() != sigma_after.size()) {
    throw DimensionMismatch("standard deviation vectors differ in length");
  }
  if ((sigma_before.array() <= 0.0).any() || (sigma_after.array() <= 0.0).any()) {
    throw DegenerateVarianceError("inflation factors need positive standard deviations");
  }
  return sigma_after.cwiseQuotient(sigma_before);
}

std::optional<double> uniform_inflation_factor(const Vector& sigma_before,
                                               const Vector& sigma_after,
                                               double relative_tolerance) {
  const Vector ratio = equivalent_inflation_factor(sigma_before, sigma_after);
  const double lo = ratio.minCoeff();
  const double hi = ratio.maxCoeff();
  if (hi - lo > relative_tolerance * hi) return std::nullopt;
  return ratio.mean();
}

InverseCorrectionSpectrum inverse_correction_spectrum(const ReconditionReport& report,
                                                      const SpectralDecomposition& decomp) {
  const Eigen::Index d = report.result.dim();
  if (decomp.dim() != d) throw DimensionMismatch("decomposition does not match report");
  const double l1 = decomp.largest();
  if (!(l1 > 0.0) || !(decomp.smallest() > kSingularTolerance * l1)) {
    throw SingularMatrixError(
        "inverse correction is only defined for an invertible original matrix");
  }
  const Vector& lambda = decomp.eigenvalues;
  switch (report.method) {
    case Method::kRidgeRegression: {
      const double delta = report.parameter;
      Vector c = (delta / (lambda.array() * (lambda.array() + delta))).matrix();
      return {report.method, std::move(c), 1.0};
    }
    case Method::kMinimumEigenvalue: {
      const double t = report.parameter;
      Vector c = Vector::Zero(d);
      for (Eigen::Index k = 0; k < d; ++k) {
        if (report.gamma(k) > 0.0) c(k) = (t - lambda(k)) / (t * lambda(k));
      }
      return {report.method, std::move(c), 1.0};
    }
    case Method::kVarianceInflation: {
      const double alpha = report.parameter;
      return {report.method, Vector::Zero(d), 1.0 / (alpha * alpha)};
    }
  }
  throw InvalidParamsError("unknown reconditioning method");
}

Matrix correlation_change_report(const SymmetricMatrix& c_before,
                                 const SymmetricMatrix& c_after) {
  if (c_before.dim() != c_after.dim()) {
    throw DimensionMismatch("correlation matrices differ in dimension");
  }
  const Eigen::Index d = c_before.dim();
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double c = c_before(i, j);
      const double sign = (c > 0.0) - (c < 0.0);
      out(i, j) = (i == j) ? 0.0 : (c - c_after(i, j)) * sign;
    }
  }
  return out;
}

}  // namespace covrecon
