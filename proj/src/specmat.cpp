#include "covrecon/specmat.hpp"

#include "covrecon/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

namespace covrecon {

SymmetricMatrix::SymmetricMatrix(Matrix entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    std::ostringstream msg;
    msg << "symmetric matrix must be square and non-empty, got " << entries.rows()
        << "x" << entries.cols();
    throw ValidationError(msg.str());
  }
  if (!entries.allFinite()) throw ValidationError("matrix has non-finite entries");
  const double scale = entries.cwiseAbs().maxCoeff();
  const double tol = kSymmetryTolerance * scale;
  for (Eigen::Index j = 0; j < entries.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < entries.rows(); ++i) {
      const double gap = std::abs(entries(i, j) - entries(j, i));
      if (gap > tol) {
        std::ostringstream msg;
        msg << "matrix is not symmetric: |A(" << i << "," << j << ") - A(" << j
            << "," << i << ")| = " << gap << " exceeds " << tol;
        throw ValidationError(msg.str());
      }
      const double mid = 0.5 * (entries(i, j) + entries(j, i));
      entries(i, j) = mid;
      entries(j, i) = mid;
    }
  }
  entries_ = std::move(entries);
}

SymmetricMatrix SymmetricMatrix::identity(Eigen::Index dim) {
  return SymmetricMatrix(Matrix::Identity(dim, dim));
}

SymmetricMatrix SymmetricMatrix::diagonal(const Vector& diag) {
  return SymmetricMatrix(Matrix(diag.asDiagonal()));
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

ConditionNumber ConditionNumber::finite(double value) {
  if (!std::isfinite(value)) {
    throw InvalidParamsError("finite condition number requested with non-finite value");
  }
  ConditionNumber k;
  k.infinite_ = false;
  k.value_ = value;
  return k;
}

double ConditionNumber::value() const {
  if (infinite_) throw SingularMatrixError("condition number is infinite");
  return value_;
}

std::ostream& operator<<(std::ostream& os, const ConditionNumber& kappa) {
  if (kappa.is_infinite()) return os << "inf";
  return os << kappa.value();
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

// Two-sided rotation zeroing a(p,q), p < q.
void rotate(Matrix& a, Matrix& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    if (theta < 0.0) t = -t;
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);
  const Eigen::Index n = a.rows();

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (r == p || r == q) continue;
    const double g = a(r, p);
    const double h = a(r, q);
    const double new_p = g - s * (h + g * tau);
    const double new_q = h + s * (g - h * tau);
    a(r, p) = new_p;
    a(p, r) = new_p;
    a(r, q) = new_q;
    a(q, r) = new_q;
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    const double g = v(r, p);
    const double h = v(r, q);
    v(r, p) = g - s * (h + g * tau);
    v(r, q) = h + s * (g - h * tau);
  }
}

}  // namespace

SpectralDecomposition sym_eigendecompose(const SymmetricMatrix& s,
                                         const JacobiOptions& options) {
  Matrix a = s.entries();
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  const double threshold = options.relative_tolerance * a.norm();

  bool converged = false;
  for (int sweep = 0; sweep <= options.max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= threshold) {
      converged = true;
      break;
    }
    if (sweep == options.max_sweeps) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Once the matrix is nearly diagonal, entries below the rounding
        // level of both diagonal entries are dropped without rotating.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    }
  }
  if (!converged) {
    throw NumericalBreakdownError("Jacobi eigensolver did not converge within " +
                                  std::to_string(options.max_sweeps) + " sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&a](Eigen::Index i, Eigen::Index j) {
    return a(i, i) > a(j, j);
  });

  SpectralDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
  }
  return out;
}

PsdCheck enforce_psd(SpectralDecomposition& decomp) {
  const double lmin = decomp.smallest();
  const double scale = std::max(std::abs(decomp.largest()), std::abs(lmin));
  if (lmin < -kPsdTolerance * scale) {
    std::ostringstream msg;
    msg << "matrix is not positive semi-definite: smallest eigenvalue " << lmin;
    throw NotPsdError(msg.str(), lmin);
  }
  bool clamped = false;
  for (Eigen::Index k = 0; k < decomp.eigenvalues.size(); ++k) {
    if (decomp.eigenvalues(k) < 0.0) {
      decomp.eigenvalues(k) = 0.0;
      clamped = true;
    }
  }
  return {lmin, clamped};
}

ConditionNumber condition_number(const SpectralDecomposition& psd_decomp) {
  const double l1 = psd_decomp.largest();
  const double ld = psd_decomp.smallest();
  if (ld < 0.0) {
    throw NotPsdError("condition number requested for an indefinite spectrum", ld);
  }
  if (ld == 0.0 || l1 == 0.0) return ConditionNumber::infinite();
  return ConditionNumber::finite(l1 / ld);
}

ConditionNumber condition_number(const SymmetricMatrix& s) {
  auto decomp = sym_eigendecompose(s);
  enforce_psd(decomp);
  return condition_number(decomp);
}

Vector circulant_eigenvalues(std::span<const double> first_row) {
  const std::size_t n = first_row.size();
  if (n == 0) throw ValidationError("circulant row must be non-empty");
  double scale = 0.0;
  for (double c : first_row) scale = std::max(scale, std::abs(c));
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(first_row[k] - first_row[n - k]) > kSymmetryTolerance * scale) {
      throw ValidationError("circulant row is not symmetric at offset " +
                            std::to_string(k));
    }
  }

  // Angles reduced modulo n so every twiddle factor comes from one table.
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) /
                         static_cast<double>(n);
    cos_table[j] = std::cos(angle);
    sin_table[j] = std::sin(angle);
  }
  const double l1 = std::accumulate(first_row.begin(), first_row.end(), 0.0,
                                    [](double acc, double c) { return acc + std::abs(c); });
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t f = 0; f < n; ++f) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = (f * k) % n;
      re += first_row[k] * cos_table[j];
      im -= first_row[k] * sin_table[j];
    }
    if (std::abs(im) > 1e-10 * std::max(1.0, l1)) {
      throw NumericalBreakdownError("circulant spectrum has a non-vanishing imaginary part");
    }
    out(static_cast<Eigen::Index>(f)) = re;
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

namespace {

std::shared_ptr<const SpectralDecomposition> checked_psd(const SymmetricMatrix& s) {
  auto decomp = std::make_shared<SpectralDecomposition>(sym_eigendecompose(s));
  enforce_psd(*decomp);
  return decomp;
}

}  // namespace

SpdInverse::SpdInverse(const SymmetricMatrix& s) : SpdInverse(checked_psd(s)) {}

SpdInverse::SpdInverse(std::shared_ptr<const SpectralDecomposition> decomp)
    : decomp_(std::move(decomp)) {
  const double l1 = decomp_->largest();
  const double ld = decomp_->smallest();
  if (!(l1 > 0.0) || !(ld > kSingularTolerance * l1)) {
    std::ostringstream msg;
    msg << "matrix is singular to working tolerance (lambda_1 = " << l1
        << ", lambda_d = " << ld << ")";
    throw SingularMatrixError(msg.str());
  }
  inverse_eigenvalues_ = decomp_->eigenvalues.cwiseInverse();
}

Vector SpdInverse::apply(const Vector& v) const {
  if (v.size() != dim()) {
    throw DimensionMismatch("vector length " + std::to_string(v.size()) +
                            " does not match matrix dimension " + std::to_string(dim()));
  }
  const Matrix& vecs = decomp_->eigenvectors;
  Vector coeffs = vecs.transpose() * v;
  coeffs.array() *= inverse_eigenvalues_.array();
  return vecs * coeffs;
}

Vector spd_inverse_apply(const SymmetricMatrix& s, const Vector& v) {
  return SpdInverse(s).apply(v);
}

}  // namespace covrecon
