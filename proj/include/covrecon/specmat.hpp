#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <span>

namespace covrecon {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative tolerance used when checking A(i,j) == A(j,i).
inline constexpr double kSymmetryTolerance = 1e-12;
/// Eigenvalues in [-kPsdTolerance * lambda_1, 0) are clamped to zero.
inline constexpr double kPsdTolerance = 1e-10;
/// lambda_d must exceed this fraction of lambda_1 for a matrix to be inverted.
inline constexpr double kSingularTolerance = 1e-12;

/// Dense real symmetric matrix. Construction checks symmetry against
/// kSymmetryTolerance * max|entry| and stores the exactly symmetrised entries.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(Matrix entries);

  static SymmetricMatrix identity(Eigen::Index dim);
  static SymmetricMatrix diagonal(const Vector& diag);

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  Matrix entries_;
};

/// Eigenpairs of a symmetric matrix: eigenvalues descending, eigenvectors in
/// the matching columns (orthonormal).
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;

  Eigen::Index dim() const noexcept { return eigenvalues.size(); }
  double largest() const { return eigenvalues(0); }
  double smallest() const { return eigenvalues(eigenvalues.size() - 1); }

  /// V diag(eigenvalues) V^T.
  Matrix reconstruct() const;
};

/// Condition number as an extended real: either a finite ratio or INFINITE
/// (singular PSD matrix). Never encoded as a floating-point sentinel.
class ConditionNumber {
 public:
  static ConditionNumber finite(double value);
  static ConditionNumber infinite() noexcept { return ConditionNumber(); }

  bool is_infinite() const noexcept { return infinite_; }
  bool is_finite() const noexcept { return !infinite_; }
  /// Throws SingularMatrixError when infinite.
  double value() const;

  /// True when this is strictly smaller than x (a finite real).
  bool less_than(double x) const noexcept { return !infinite_ && value_ < x; }
  bool greater_than(double x) const noexcept { return infinite_ || value_ > x; }

  friend bool operator==(const ConditionNumber&, const ConditionNumber&) = default;

 private:
  ConditionNumber() = default;
  bool infinite_ = true;
  double value_ = 0.0;
};

std::ostream& operator<<(std::ostream& os, const ConditionNumber& kappa);

struct JacobiOptions {
  double relative_tolerance = 1e-13;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigendecomposition. Ties in the eigenvalue ordering keep the
/// original diagonal index order. Throws NumericalBreakdownError when the
/// sweep cap is reached without convergence.
SpectralDecomposition sym_eigendecompose(const SymmetricMatrix& s,
                                         const JacobiOptions& options = {});

/// Result of applying the PSD tolerance rules to a spectrum.
struct PsdCheck {
  double min_eigenvalue;  // as computed, before clamping
  bool clamped;           // true if tiny negatives were set to zero
};

/// Applies the PSD tolerance in place: eigenvalues in [-tol*scale, 0) become 0.
/// Throws NotPsdError below that.
PsdCheck enforce_psd(SpectralDecomposition& decomp);

ConditionNumber condition_number(const SpectralDecomposition& psd_decomp);
ConditionNumber condition_number(const SymmetricMatrix& s);

/// Eigenvalues of the symmetric circulant matrix with the given first row,
/// via its DFT. Descending.
Vector circulant_eigenvalues(std::span<const double> first_row);

/// Solves S x = v through a cached spectral decomposition of S.
class SpdInverse {
 public:
  explicit SpdInverse(const SymmetricMatrix& s);
  explicit SpdInverse(std::shared_ptr<const SpectralDecomposition> decomp);

  Eigen::Index dim() const noexcept { return decomp_->dim(); }
  Vector apply(const Vector& v) const;
  const SpectralDecomposition& decomposition() const noexcept { return *decomp_; }

 private:
  std::shared_ptr<const SpectralDecomposition> decomp_;
  Vector inverse_eigenvalues_;
};

Vector spd_inverse_apply(const SymmetricMatrix& s, const Vector& v);

}  // namespace covrecon
