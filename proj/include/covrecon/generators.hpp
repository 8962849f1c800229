#pragma once

#include "covrecon/covariance.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace covrecon {

/// How the distance between grid points on the unit circle is measured.
/// kChord is the default: it is the convention that reproduces the reference
/// condition number of the 200-point, lengthscale-0.2 SOAR matrix.
enum class DistanceConvention { kArc, kChord };

std::string_view to_string(DistanceConvention c) noexcept;
/// Accepts "arc" or "chord"; throws InvalidParamsError otherwise.
DistanceConvention parse_distance_convention(std::string_view text);

/// Second-order auto-regressive covariance on n equally spaced points of the
/// unit circle: variance * (1 + r/L) exp(-r/L), r the point separation.
struct SoarSpec {
  Eigen::Index n = 200;
  double lengthscale = 0.2;
  double variance = 5.0;
  DistanceConvention convention = DistanceConvention::kChord;
};

/// Distance between grid points i and j under the given convention.
double circle_distance(Eigen::Index i, Eigen::Index j, Eigen::Index n,
                       DistanceConvention convention);

double soar_correlation(double distance, double lengthscale);

/// First row of the (circulant) SOAR covariance matrix.
Vector soar_first_row(const SoarSpec& spec);

CovarianceMatrix soar_matrix(const SoarSpec& spec);

struct SampleSet {
  Matrix samples;  // m x d, one draw per row
  std::uint64_t seed;
  std::optional<CovarianceMatrix> source_covariance;
};

/// m zero-mean Gaussian draws with covariance R, generated as z^T R^{1/2} with
/// R^{1/2} = V Lambda^{1/2} V^T and z from NormalStream(seed), filled row by row.
SampleSet gaussian_samples(const CovarianceMatrix& r, Eigen::Index m, std::uint64_t seed);

/// Unbiased (1/(m-1)) covariance about the sample mean.
CovarianceMatrix sample_covariance(const SampleSet& samples);
CovarianceMatrix sample_covariance(const Matrix& samples);

/// x(k) = 4 sin(w k) - 5.1 sin(7 w k) + 1.5 sin(12 w k) - 3 sin(15 w k)
///        + 0.75 sin(45 w k), w = 2 pi / n, k = 0..n-1.
Vector truth_signal(Eigen::Index n = 200);

}  // namespace covrecon
