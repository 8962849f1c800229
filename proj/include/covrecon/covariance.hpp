#pragma once

#include "covrecon/specmat.hpp"

#include <memory>

namespace covrecon {

/// Symmetric positive semi-definite matrix with its (PSD-clamped) spectrum
/// cached. Every instance has passed validation; there is no unvalidated state.
class CovarianceMatrix {
 public:
  /// Decomposes, applies the PSD tolerance rules and checks the diagonal.
  static CovarianceMatrix validate(SymmetricMatrix matrix);
  static CovarianceMatrix validate(const Matrix& entries);

  /// Adopts a spectrum known analytically for `matrix` (e.g. a shifted
  /// spectrum after reconditioning). The caller guarantees the pairing.
  static CovarianceMatrix with_spectrum(SymmetricMatrix matrix,
                                        SpectralDecomposition spectrum);

  Eigen::Index dim() const noexcept { return matrix_.dim(); }
  const SymmetricMatrix& matrix() const noexcept { return matrix_; }
  const Matrix& entries() const noexcept { return matrix_.entries(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return matrix_(i, j); }

  const SpectralDecomposition& spectrum() const noexcept { return *spectrum_; }
  std::shared_ptr<const SpectralDecomposition> shared_spectrum() const noexcept {
    return spectrum_;
  }
  /// Smallest eigenvalue before clamping.
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  /// True if tiny negative eigenvalues were clamped to zero.
  bool clamped() const noexcept { return clamped_; }
  ConditionNumber condition_number() const { return covrecon::condition_number(*spectrum_); }
  bool is_positive_definite() const noexcept;

  Vector variances() const { return matrix_.entries().diagonal(); }

 private:
  CovarianceMatrix(SymmetricMatrix matrix,
                   std::shared_ptr<const SpectralDecomposition> spectrum,
                   double min_eigenvalue, bool clamped);

  SymmetricMatrix matrix_;
  std::shared_ptr<const SpectralDecomposition> spectrum_;
  double min_eigenvalue_;
  bool clamped_;
};

/// R = Sigma C Sigma with C unit-diagonal and Sigma the standard deviations.
class CorrStdPair {
 public:
  CorrStdPair(SymmetricMatrix correlations, Vector std_devs);

  const SymmetricMatrix& correlations() const noexcept { return correlations_; }
  const Vector& std_devs() const noexcept { return std_devs_; }
  Eigen::Index dim() const noexcept { return std_devs_.size(); }

 private:
  SymmetricMatrix correlations_;
  Vector std_devs_;
};

/// Throws DegenerateVarianceError if any variance is not strictly positive.
CorrStdPair decompose_corr_std(const CovarianceMatrix& r);
CorrStdPair decompose_corr_std(const SymmetricMatrix& r);

CovarianceMatrix recompose(const CorrStdPair& pair);

}  // namespace covrecon
