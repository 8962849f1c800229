#include "covrecon/assimilation.hpp"

#include "covrecon/errors.hpp"
#include "covrecon/recondition.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace covrecon {

void validate(const DAProblem& p) {
  const Eigen::Index n = p.b.dim();
  const Eigen::Index d = p.r.dim();
  if (p.h.rows() != d || p.h.cols() != n || p.x_b.size() != n || p.y.size() != d) {
    std::ostringstream msg;
    msg << "inconsistent DA problem: B " << n << "x" << n << ", R " << d << "x" << d
        << ", H " << p.h.rows() << "x" << p.h.cols() << ", x_b " << p.x_b.size() << ", y "
        << p.y.size();
    throw DimensionMismatch(msg.str());
  }
}

ObjectiveValue evaluate_objective(const DAProblem& p, const Vector& x) {
  validate(p);
  if (x.size() != p.b.dim()) throw DimensionMismatch("state vector has the wrong length");
  const SpdInverse b_inv(p.b.shared_spectrum());
  const SpdInverse r_inv(p.r.shared_spectrum());
  const Vector dx = x - p.x_b;
  const Vector innovation = p.y - p.h * x;
  const double jb = 0.5 * dx.dot(b_inv.apply(dx));
  const double jo = 0.5 * innovation.dot(r_inv.apply(innovation));
  return {jb + jo, jb, jo};
}

double observation_term_reduction(const InverseCorrectionSpectrum& correction,
                                  const SpectralDecomposition& decomp,
                                  const Vector& innovation) {
  const Eigen::Index d = decomp.dim();
  if (innovation.size() != d || correction.diag_correction.size() != d) {
    throw DimensionMismatch("observation_term_reduction: inconsistent dimensions");
  }
  if (!(decomp.smallest() > kSingularTolerance * decomp.largest())) {
    throw SingularMatrixError("observation term needs an invertible R");
  }
  const Vector w = decomp.eigenvectors.transpose() * innovation;
  const auto weights = correction.diag_correction.array() +
                       (1.0 - correction.uniform_factor) / decomp.eigenvalues.array();
  return 0.5 * (w.array().square() * weights).sum();
}

std::string_view to_string(ObservationWeight w) noexcept {
  return w == ObservationWeight::kInverse ? "inverse" : "direct";
}

ObservationWeight parse_observation_weight(std::string_view text) {
  if (text == "inverse") return ObservationWeight::kInverse;
  if (text == "direct") return ObservationWeight::kDirect;
  throw InvalidParamsError("unknown observation weight '" + std::string(text) +
                           "' (expected inverse or direct)");
}

HessianOperator::HessianOperator(const CovarianceMatrix& b, const CovarianceMatrix& r,
                                 std::optional<Matrix> h, ObservationWeight weight)
    : b_inverse_(b.shared_spectrum()), h_(std::move(h)) {
  const Eigen::Index n = b.dim();
  const Eigen::Index d = r.dim();
  if (h_ ? (h_->rows() != d || h_->cols() != n) : (d != n)) {
    throw DimensionMismatch("observation operator does not match B and R");
  }
  if (weight == ObservationWeight::kInverse) {
    r_inverse_.emplace(r.shared_spectrum());
  } else {
    r_direct_ = r.entries();
  }
}

Vector HessianOperator::apply(const Vector& v) const {
  Vector out = b_inverse_.apply(v);
  const Vector hv = h_ ? Vector(*h_ * v) : v;
  const Vector weighted = r_inverse_ ? r_inverse_->apply(hv) : Vector(*r_direct_ * hv);
  if (h_) {
    out.noalias() += h_->transpose() * weighted;
  } else {
    out += weighted;
  }
  return out;
}

HessianOperator hessian_apply(const DAProblem& p) {
  validate(p);
  return HessianOperator(p.b, p.r, p.h);
}

CGResult cg_solve(const LinearOperator& s, const Vector& b, const CGOptions& options) {
  const double b_norm = b.norm();
  if (!std::isfinite(b_norm)) throw NumericalBreakdownError("right-hand side is not finite");
  CGResult result{Vector::Zero(b.size()), 0, false, 0.0, {}};
  if (b_norm == 0.0) {
    result.converged = true;
    result.residual_history.push_back(0.0);
    return result;
  }

  Vector r = b;
  Vector p = r;
  double rr = r.squaredNorm();
  result.residual_history.push_back(1.0);
  for (int k = 1; k <= options.max_iterations; ++k) {
    const Vector sp = s(p);
    const double curvature = p.dot(sp);
    if (!std::isfinite(curvature) || !(curvature > 0.0)) {
      throw NumericalBreakdownError("CG breakdown at iteration " + std::to_string(k) +
                                    ": p^T S p = " + std::to_string(curvature));
    }
    const double step = rr / curvature;
    result.solution.noalias() += step * p;
    r.noalias() -= step * sp;
    const double rr_next = r.squaredNorm();
    if (!std::isfinite(rr_next)) {
      throw NumericalBreakdownError("CG residual became non-finite at iteration " +
                                    std::to_string(k));
    }
    const double relative = std::sqrt(rr_next) / b_norm;
    result.iterations = k;
    result.final_relative_residual = relative;
    result.residual_history.push_back(relative);
    if (relative < options.tolerance) {
      result.converged = true;
      break;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return result;
}

Vector dft_imag(const Vector& x) {
  const Eigen::Index n = x.size();
  Vector out = Vector::Zero(n);
  if (n == 0) return out;
  Vector sines(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    sines(j) = (2 * j) % n == 0 ? 0.0
                                : std::sin(2.0 * std::numbers::pi * static_cast<double>(j) /
                                           static_cast<double>(n));
  }
  for (Eigen::Index f = 0; f < n; ++f) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc -= x(k) * sines((f * k) % n);
    out(f) = acc;
  }
  return out;
}

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::kTrue:
      return "TRUE";
    case Variant::kEstimated:
      return "EST";
    case Variant::kRidge:
      return "RR";
    case Variant::kMinEig:
      return "ME";
    case Variant::kInflRidge:
      return "INFL_RR";
    case Variant::kInflMinEig:
      return "INFL_ME";
  }
  return "?";
}

const VariantSolve& DAExperimentResult::find(Variant v, std::optional<double> kappa_max) const {
  for (const auto& s : solves) {
    if (s.variant == v && s.kappa_max == kappa_max) return s;
  }
  std::ostringstream msg;
  msg << "no " << to_string(v) << " solve";
  if (kappa_max) msg << " for kappa_max " << *kappa_max;
  throw InvalidParamsError(msg.str());
}

namespace {

double entry_ratio(const CovarianceMatrix& modified, const CovarianceMatrix& original) {
  return std::sqrt(modified(0, 0) / original(0, 0));
}

double mean_ratio(const CovarianceMatrix& modified, const CovarianceMatrix& original) {
  return (modified.variances().array() / original.variances().array()).sqrt().mean();
}

}  // namespace

DAExperimentResult run_da_experiment(const DAExperimentConfig& config) {
  if (config.n < 2) throw InvalidParamsError("experiment needs n >= 2");
  const auto b = soar_matrix({config.n, config.background_lengthscale,
                              config.background_variance, config.convention});
  const auto r_true = soar_matrix({config.n, config.observation_lengthscale,
                                   config.observation_variance, config.convention});
  const Vector x_true = truth_signal(config.n);
  const Vector rhs = HessianOperator(b, r_true, std::nullopt, config.weight).apply(x_true);

  const CovarianceMatrix r_est =
      config.estimate_from_truth
          ? r_true
          : sample_covariance(gaussian_samples(r_true, config.m_samples, config.seed));
  const Vector sigma_est = r_est.variances().cwiseSqrt();

  DAExperimentResult out{config,
                         x_true,
                         rhs,
                         dft_imag(x_true),
                         r_est.condition_number(),
                         sigma_est.minCoeff(),
                         sigma_est.maxCoeff(),
                         {},
                         {}};

  const auto solve = [&](Variant variant, const CovarianceMatrix& r,
                         std::optional<double> kappa_max, std::optional<double> alpha) {
    const HessianOperator s(b, r, std::nullopt, config.weight);
    CGResult cg = cg_solve(std::cref(s), rhs, config.cg);
    Vector dft = dft_imag(cg.solution);
    out.solves.push_back(VariantSolve{variant, kappa_max, alpha, r.condition_number(),
                                      std::move(cg), std::move(dft)});
  };

  solve(Variant::kTrue, r_true, std::nullopt, std::nullopt);
  solve(Variant::kEstimated, r_est, std::nullopt, std::nullopt);

  for (double kappa : config.kappa_max) {
    const auto rr = ridge_regression(r_est, kappa);
    const auto me = min_eigenvalue(r_est, kappa);
    const InflationMatch match{kappa, entry_ratio(rr.result, r_est),
                               entry_ratio(me.result, r_est), mean_ratio(rr.result, r_est),
                               mean_ratio(me.result, r_est)};
    out.inflation.push_back(match);
    const double alpha_rr = config.alpha_rr.value_or(match.alpha_rr_entry);
    const double alpha_me = config.alpha_me.value_or(match.alpha_me_entry);

    solve(Variant::kRidge, rr.result, kappa, std::nullopt);
    solve(Variant::kMinEig, me.result, kappa, std::nullopt);
    solve(Variant::kInflRidge, mvi(r_est, alpha_rr).result, kappa, alpha_rr);
    solve(Variant::kInflMinEig, mvi(r_est, alpha_me).result, kappa, alpha_me);
  }
  return out;
}

}  // namespace covrecon
