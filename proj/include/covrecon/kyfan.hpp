#pragma once

#include "covrecon/covariance.hpp"

#include <cstdint>
#include <optional>

namespace covrecon {

struct KyFanParams {
  double p = 1.0;
  Eigen::Index k = 1;
};

/// (sum of the k largest singular values to the power p)^(1/p). For a
/// symmetric matrix the singular values are the absolute eigenvalues.
double ky_fan_norm(const SymmetricMatrix& x, const KyFanParams& params);

/// Same norm from a list of singular values in any order.
double ky_fan_norm_of_singular_values(Vector singular_values, const KyFanParams& params);

/// Equivalence check between the minimum-eigenvalue method and the trace-norm
/// nearest matrix with condition number kappa_max. `l` is the 1-based index
/// with lambda_l <= T < lambda_{l-1}; the minimiser coincides with the
/// minimum-eigenvalue result when kappa_max >= d - l + 1.
struct KyFanCondition {
  double threshold;
  Eigen::Index l;
  Eigen::Index bound;
  bool satisfied;         // kappa_max >= bound
  bool satisfied_strict;  // kappa_max > bound
};

KyFanCondition me_kyfan_condition(const CovarianceMatrix& r, double kappa_max);

/// Smallest integer kappa_max (below the condition number of r) for which the
/// condition holds; empty if none.
std::optional<long> smallest_kyfan_kappa(const CovarianceMatrix& r, bool strict = false);

/// ||R - R_ME||_{1,d} for the minimum-eigenvalue result at kappa_max.
double me_trace_distance(const CovarianceMatrix& r, double kappa_max);

struct KyFanOracleOptions {
  int trials = 10000;
  std::uint64_t seed = 1;
  bool include_me_candidate = false;
};

/// Randomised search over PSD candidates with condition number exactly
/// kappa_max: R's eigenvectors, perturbed and fully random bases, with
/// spectra clipped to [mu, kappa_max * mu] around T. Returns the smallest
/// ||R - X||_{1,d} found. Intended for d <= 4.
double kyfan_minimizer_oracle(const CovarianceMatrix& r, double kappa_max,
                              const KyFanOracleOptions& options = {});

}  // namespace covrecon
