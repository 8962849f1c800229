#include "covrecon/generators.hpp"

#include "covrecon/errors.hpp"
#include "covrecon/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace covrecon {

std::string_view to_string(DistanceConvention c) noexcept {
  return c == DistanceConvention::kArc ? "arc" : "chord";
}

DistanceConvention parse_distance_convention(std::string_view text) {
  if (text == "arc") return DistanceConvention::kArc;
  if (text == "chord") return DistanceConvention::kChord;
  throw InvalidParamsError("unknown distance convention '" + std::string(text) +
                           "' (expected arc or chord)");
}

double circle_distance(Eigen::Index i, Eigen::Index j, Eigen::Index n,
                       DistanceConvention convention) {
  const Eigen::Index gap = std::abs(i - j) % n;
  const Eigen::Index steps = std::min(gap, n - gap);
  const double theta =
      2.0 * std::numbers::pi * static_cast<double>(steps) / static_cast<double>(n);
  return convention == DistanceConvention::kArc ? theta : 2.0 * std::sin(0.5 * theta);
}

double soar_correlation(double distance, double lengthscale) {
  const double scaled = distance / lengthscale;
  return (1.0 + scaled) * std::exp(-scaled);
}

namespace {

void check_spec(const SoarSpec& spec) {
  if (spec.n < 2) throw InvalidParamsError("SOAR grid needs at least 2 points");
  if (!(spec.lengthscale > 0.0)) throw InvalidParamsError("SOAR lengthscale must be > 0");
  if (!(spec.variance > 0.0)) throw InvalidParamsError("SOAR variance must be > 0");
}

}  // namespace

Vector soar_first_row(const SoarSpec& spec) {
  check_spec(spec);
  Vector row(spec.n);
  for (Eigen::Index j = 0; j < spec.n; ++j) {
    row(j) = spec.variance *
             soar_correlation(circle_distance(0, j, spec.n, spec.convention), spec.lengthscale);
  }
  return row;
}

CovarianceMatrix soar_matrix(const SoarSpec& spec) {
  const Vector row = soar_first_row(spec);
  const Eigen::Index n = spec.n;
  Matrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = row(((j - i) % n + n) % n);
  }
  return CovarianceMatrix::validate(SymmetricMatrix(std::move(m)));
}

SampleSet gaussian_samples(const CovarianceMatrix& r, Eigen::Index m, std::uint64_t seed) {
  if (m < 1) throw InsufficientSamplesError("at least one sample must be requested");
  const SpectralDecomposition& spec = r.spectrum();
  const Matrix root = spec.eigenvectors * spec.eigenvalues.cwiseSqrt().asDiagonal() *
                      spec.eigenvectors.transpose();
  const Eigen::Index d = r.dim();
  NormalStream stream(seed);
  Matrix z(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = stream.normal();
  }
  return SampleSet{z * root, seed, r};
}

CovarianceMatrix sample_covariance(const Matrix& samples) {
  const Eigen::Index m = samples.rows();
  if (m < 2) {
    throw InsufficientSamplesError("sample covariance needs at least 2 samples, got " +
                                   std::to_string(m));
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Matrix centered = samples.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(m - 1);
  return CovarianceMatrix::validate(SymmetricMatrix(std::move(cov)));
}

CovarianceMatrix sample_covariance(const SampleSet& samples) {
  return sample_covariance(samples.samples);
}

Vector truth_signal(Eigen::Index n) {
  if (n < 1) throw InvalidParamsError("signal length must be positive");
  struct Component {
    double amplitude;
    int frequency;
  };
  static constexpr std::array<Component, 5> kComponents{
      {{4.0, 1}, {-5.1, 7}, {1.5, 12}, {-3.0, 15}, {0.75, 45}}};
  Vector x(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double sum = 0.0;
    for (const auto& c : kComponents) {
      // f*k is reduced modulo n first; multiples of a half period are exact zeros.
      const auto phase = (static_cast<Eigen::Index>(c.frequency) * k) % n;
      if ((2 * phase) % n == 0) continue;
      sum += c.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(phase) /
                                    static_cast<double>(n));
    }
    x(k) = sum;
  }
  return x;
}

}  // namespace covrecon
