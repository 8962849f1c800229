#pragma once

#include "covrecon/covariance.hpp"
#include "covrecon/specmat.hpp"

#include <optional>
#include <string_view>

namespace covrecon {

enum class Method { kRidgeRegression, kMinimumEigenvalue, kVarianceInflation };

std::string_view to_string(Method method) noexcept;

/// Outcome of one reconditioning (or inflation) step.
///
/// `parameter` is the shift delta for ridge regression, the eigenvalue
/// threshold T for the minimum-eigenvalue method and the inflation constant
/// alpha for variance inflation. `gamma` holds the per-eigenvalue increments of
/// the minimum-eigenvalue method (zeros otherwise), indexed like the
/// descending spectrum of the input. `correlation_delta` is
/// (C - C_mod) o sign(C): positive entries are correlations that shrank.
struct ReconditionReport {
  Method method;
  ConditionNumber kappa_before;
  double kappa_after;
  double parameter;
  Vector gamma;
  CovarianceMatrix result;
  Vector sigma_before;
  Vector sigma_after;
  Matrix correlation_delta;
};

/// Diagonal of V^T (R^-1 - R_mod^-1) V for ridge regression and the minimum
/// eigenvalue method, or the uniform factor 1/alpha^2 relating R_mod^-1 to
/// R^-1 for variance inflation.
struct InverseCorrectionSpectrum {
  Method method;
  Vector diag_correction;
  double uniform_factor;
};

/// Ridge-regression shift giving (lambda_1 + delta)/(lambda_d + delta) == kappa_max.
/// Throws InvalidTargetError for kappa_max <= 1 and NoOpRequestError when
/// kappa_max is not below lambda_1/lambda_d.
double rr_delta(double lambda_1, double lambda_d, double kappa_max);

/// Minimum-eigenvalue threshold T = lambda_1 / kappa_max, after the same
/// target validation as rr_delta.
double me_threshold(const CovarianceMatrix& r, double kappa_max);

/// R + delta I with delta from rr_delta.
ReconditionReport ridge_regression(const CovarianceMatrix& r, double kappa_max);

/// Raises every eigenvalue below T = lambda_1/kappa_max to T, keeping the
/// eigenvectors: gamma(k) = max(T - lambda_k, 0) and the result is
/// R + V diag(gamma) V^T.
ReconditionReport min_eigenvalue(const CovarianceMatrix& r, double kappa_max);

/// alpha^2 R. Requires R to be invertible.
ReconditionReport mvi(const CovarianceMatrix& r, double alpha);

Vector rr_sigma_update(const Vector& sigma, double delta);

/// sqrt(R(i,i) + sum_k V(i,k)^2 gamma(k)).
Vector me_sigma_update(const CovarianceMatrix& r, const SpectralDecomposition& decomp,
                       const Vector& gamma);

/// Entrywise sigma_after / sigma_before.
Vector equivalent_inflation_factor(const Vector& sigma_before, const Vector& sigma_after);

/// The common ratio when all entries of equivalent_inflation_factor agree to
/// `relative_tolerance`; empty otherwise.
std::optional<double> uniform_inflation_factor(const Vector& sigma_before,
                                               const Vector& sigma_after,
                                               double relative_tolerance = 1e-10);

/// `decomp` must be the spectrum of the matrix the report was produced from.
/// Throws SingularMatrixError when that matrix is not invertible.
InverseCorrectionSpectrum inverse_correction_spectrum(const ReconditionReport& report,
                                                      const SpectralDecomposition& decomp);

Matrix correlation_change_report(const SymmetricMatrix& c_before,
                                 const SymmetricMatrix& c_after);

}  // namespace covrecon
