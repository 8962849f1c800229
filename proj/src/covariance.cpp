#include "covrecon/covariance.hpp"

#include "covrecon/errors.hpp"

#include <cmath>
#include <sstream>

namespace covrecon {

CovarianceMatrix::CovarianceMatrix(SymmetricMatrix matrix,
                                   std::shared_ptr<const SpectralDecomposition> spectrum,
                                   double min_eigenvalue, bool clamped)
    : matrix_(std::move(matrix)),
      spectrum_(std::move(spectrum)),
      min_eigenvalue_(min_eigenvalue),
      clamped_(clamped) {}

CovarianceMatrix CovarianceMatrix::validate(SymmetricMatrix matrix) {
  auto spectrum = std::make_shared<SpectralDecomposition>(sym_eigendecompose(matrix));
  const PsdCheck check = enforce_psd(*spectrum);
  const double floor = -kPsdTolerance * std::max(spectrum->largest(), 0.0);
  for (Eigen::Index i = 0; i < matrix.dim(); ++i) {
    if (matrix(i, i) < floor) {
      std::ostringstream msg;
      msg << "covariance has a negative variance at index " << i << ": " << matrix(i, i);
      throw ValidationError(msg.str());
    }
  }
  return CovarianceMatrix(std::move(matrix), std::move(spectrum), check.min_eigenvalue,
                          check.clamped);
}

CovarianceMatrix CovarianceMatrix::validate(const Matrix& entries) {
  return validate(SymmetricMatrix(entries));
}

CovarianceMatrix CovarianceMatrix::with_spectrum(SymmetricMatrix matrix,
                                                 SpectralDecomposition spectrum) {
  if (spectrum.dim() != matrix.dim() || spectrum.eigenvectors.rows() != matrix.dim()) {
    throw DimensionMismatch("spectrum dimension does not match matrix");
  }
  const double lmin = spectrum.smallest();
  auto shared = std::make_shared<SpectralDecomposition>(std::move(spectrum));
  const PsdCheck check = enforce_psd(*shared);
  return CovarianceMatrix(std::move(matrix), std::move(shared), lmin, check.clamped);
}

bool CovarianceMatrix::is_positive_definite() const noexcept {
  const double l1 = spectrum_->largest();
  return l1 > 0.0 && spectrum_->smallest() > kSingularTolerance * l1;
}

CorrStdPair::CorrStdPair(SymmetricMatrix correlations, Vector std_devs)
    : correlations_(std::move(correlations)), std_devs_(std::move(std_devs)) {
  if (correlations_.dim() != std_devs_.size()) {
    throw DimensionMismatch("correlation matrix and standard deviations differ in size");
  }
  for (Eigen::Index i = 0; i < std_devs_.size(); ++i) {
    if (!(std_devs_(i) > 0.0)) {
      throw DegenerateVarianceError("standard deviation " + std::to_string(i) +
                                    " is not strictly positive");
    }
    if (correlations_(i, i) != 1.0) {
      throw ValidationError("correlation matrix diagonal entry " + std::to_string(i) +
                            " is not exactly 1");
    }
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(correlations_(i, j)) > 1.0 + 1e-12) {
        throw ValidationError("correlation magnitude exceeds 1 at (" + std::to_string(i) +
                              "," + std::to_string(j) + ")");
      }
    }
  }
}

CorrStdPair decompose_corr_std(const SymmetricMatrix& r) {
  const Eigen::Index d = r.dim();
  Vector sigma(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(r(i, i) > 0.0)) {
      std::ostringstream msg;
      msg << "variance at index " << i << " is " << r(i, i)
          << "; correlations need strictly positive variances";
      throw DegenerateVarianceError(msg.str());
    }
    sigma(i) = std::sqrt(r(i, i));
  }
  Matrix c(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      c(i, j) = (i == j) ? 1.0 : r(i, j) / (sigma(i) * sigma(j));
    }
  }
  return CorrStdPair(SymmetricMatrix(std::move(c)), std::move(sigma));
}

CorrStdPair decompose_corr_std(const CovarianceMatrix& r) {
  return decompose_corr_std(r.matrix());
}

CovarianceMatrix recompose(const CorrStdPair& pair) {
  const Vector& s = pair.std_devs();
  Matrix r = s.asDiagonal() * pair.correlations().entries() * s.asDiagonal();
  return CovarianceMatrix::validate(SymmetricMatrix(std::move(r)));
}

}  // namespace covrecon
