#include "commands.hpp"

#include "covrecon/assimilation.hpp"
#include "covrecon/covariance.hpp"
#include "covrecon/errors.hpp"
#include "covrecon/generators.hpp"
#include "covrecon/kyfan.hpp"
#include "covrecon/matrix_csv.hpp"
#include "covrecon/recondition.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace covrecon::cli {

namespace fs = std::filesystem;

namespace {

// Human-readable number for stdout; CSV files use format_real.
std::string fmt(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fmt(const ConditionNumber& k, int digits = 8) {
  return k.is_infinite() ? std::string("inf") : fmt(k.value(), digits);
}

// Tabular CSV writer: header row plus data rows, fields joined by commas.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void save(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_row(out, header_);
    for (const auto& r : rows_) write_row(out, r);
    if (!out) throw IoError("write to '" + path.string() + "' failed");
  }

 private:
  static void write_row(std::ostream& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string real(double v) { return format_real(v); }

// Column label for a kappa_max value: 1000 -> "1000", 2.5 -> "2.5".
std::string kappa_label(double k) { return fmt(k, 17); }

fs::path prepare_out_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = (env && *env) ? fs::path(env) : fs::path(".");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
  return dir;
}

void check_kappa_list(const std::vector<double>& ks) {
  if (ks.empty()) throw InvalidTargetError("at least one --kappa-max value is required");
  for (double k : ks) {
    if (!std::isfinite(k) || !(k > 1.0)) {
      throw InvalidTargetError("--kappa-max values must be finite and > 1, got " + fmt(k, 17));
    }
  }
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

// ---------------------------------------------------------------- info

struct InfoArgs {
  std::string matrix;
};

int cmd_info(const InfoArgs& a, std::ostream& out) {
  const Matrix raw = read_matrix_csv(a.matrix);
  out << "file: " << a.matrix << '\n';
  out << "dim: " << raw.rows() << '\n';

  std::optional<SymmetricMatrix> sym;
  try {
    sym.emplace(raw);
  } catch (const ValidationError& e) {
    out << "symmetric: no\n";
    throw;
  }
  out << "symmetric: yes\n";

  SpectralDecomposition spec = sym_eigendecompose(*sym);
  out << "lambda_1: " << fmt(spec.largest(), 10) << '\n';
  out << "lambda_d: " << fmt(spec.smallest(), 10) << '\n';
  PsdCheck psd;
  try {
    psd = enforce_psd(spec);
  } catch (const NotPsdError& e) {
    out << "psd: no (min eigenvalue " << fmt(e.min_eigenvalue(), 10) << ")\n";
    throw;
  }
  out << "psd: yes" << (psd.clamped ? " (negative rounding eigenvalues clamped to 0)" : "")
      << '\n';

  const auto r = CovarianceMatrix::with_spectrum(std::move(*sym), std::move(spec));
  out << "kappa: " << fmt(r.condition_number()) << '\n';
  const Vector var = r.variances();
  const double lo = var.minCoeff();
  const double hi = var.maxCoeff();
  out << "sigma_min: " << (lo >= 0.0 ? fmt(std::sqrt(lo), 10) : std::string("nan")) << '\n';
  out << "sigma_max: " << fmt(std::sqrt(std::max(hi, 0.0)), 10) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------- recondition

struct ReconditionArgs {
  std::string matrix;
  std::string method;
  std::optional<double> kappa_max;
  std::optional<double> alpha;
  std::string out_dir;
};

int cmd_recondition(const ReconditionArgs& a, std::ostream& out) {
  const CovarianceMatrix r = load_matrix_csv(a.matrix);

  std::optional<ReconditionReport> rep;
  if (a.method == "rr" || a.method == "me") {
    if (!a.kappa_max) throw InvalidParamsError("--method " + a.method + " needs --kappa-max");
    if (a.alpha) throw InvalidParamsError("--alpha only applies to --method mvi");
    rep = a.method == "rr" ? ridge_regression(r, *a.kappa_max)
                           : min_eigenvalue(r, *a.kappa_max);
  } else {
    if (!a.alpha) throw InvalidParamsError("--method mvi needs --alpha");
    if (a.kappa_max) throw InvalidParamsError("--kappa-max does not apply to --method mvi");
    rep = mvi(r, *a.alpha);
  }

  const fs::path dir = prepare_out_dir(a.out_dir);
  save_matrix_csv(rep->result, dir / "reconditioned.csv");
  save_matrix_csv(rep->correlation_delta, dir / "correlation_delta.csv");

  const Vector ratio = equivalent_inflation_factor(rep->sigma_before, rep->sigma_after);
  Table sig({"index", "sigma_before", "sigma_after", "ratio"});
  for (Eigen::Index i = 0; i < ratio.size(); ++i) {
    sig.add({std::to_string(i + 1), real(rep->sigma_before(i)), real(rep->sigma_after(i)),
             real(ratio(i))});
  }
  sig.save(dir / "sigma_change.csv");

  out << "method=" << to_string(rep->method) << " kappa_before=" << fmt(rep->kappa_before)
      << " kappa_after=" << fmt(rep->kappa_after, 8);
  switch (rep->method) {
    case Method::kRidgeRegression:
      out << " delta=" << fmt(rep->parameter, 10);
      break;
    case Method::kMinimumEigenvalue:
      out << " T=" << fmt(rep->parameter, 10);
      break;
    case Method::kVarianceInflation:
      out << " alpha=" << fmt(rep->parameter, 10);
      break;
  }
  if (const auto u = uniform_inflation_factor(rep->sigma_before, rep->sigma_after)) {
    out << " sigma_after=" << fmt(rep->sigma_after.mean()) << " sigma_ratio=" << fmt(*u);
  } else {
    out << " sigma_after=[" << fmt(rep->sigma_after.minCoeff()) << ","
        << fmt(rep->sigma_after.maxCoeff()) << "] sigma_ratio=[" << fmt(ratio.minCoeff())
        << "," << fmt(ratio.maxCoeff()) << "]";
  }
  out << '\n';

  if (rep->method == Method::kMinimumEigenvalue) {
    const auto c = me_kyfan_condition(r, *a.kappa_max);
    out << "kyfan_condition=" << (c.satisfied ? "satisfied" : "NOT satisfied")
        << " l=" << c.l << " bound=" << c.bound;
    if (!c.satisfied) {
      // The bound moves with kappa_max, so report the smallest target that works.
      const auto k = smallest_kyfan_kappa(r, false);
      out << " smallest_satisfying_kappa_max=" << (k ? std::to_string(*k) : "none");
    }
    out << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------- soar-matrix

struct SoarArgs {
  Eigen::Index n = 200;
  double lengthscale = 0.2;
  double variance = 5.0;
  std::string convention = "chord";
};

SoarSpec to_spec(const SoarArgs& a) {
  return SoarSpec{a.n, a.lengthscale, a.variance, parse_distance_convention(a.convention)};
}

struct SoarMatrixArgs {
  SoarArgs soar;
  std::string out_file;
};

int cmd_soar_matrix(const SoarMatrixArgs& a, std::ostream& out) {
  const CovarianceMatrix r = soar_matrix(to_spec(a.soar));
  fs::path file = a.out_file;
  if (file.is_relative() && !file.has_parent_path()) file = prepare_out_dir("") / file;
  save_matrix_csv(r, file);
  out << "wrote " << file.string() << " (n=" << r.dim()
      << ", kappa=" << fmt(r.condition_number()) << ")\n";
  return kExitOk;
}

// ------------------------------------------------------ soar-experiment

struct SoarExperimentArgs {
  SoarArgs soar;
  std::vector<double> kappa_max{1000.0, 500.0, 100.0};
  Eigen::Index row = 100;
  std::string out_dir;
};

int cmd_soar_experiment(const SoarExperimentArgs& a, std::ostream& out) {
  check_kappa_list(a.kappa_max);
  const CovarianceMatrix r = soar_matrix(to_spec(a.soar));
  if (a.row < 1 || a.row > r.dim()) {
    throw InvalidParamsError("--row must lie in 1.." + std::to_string(r.dim()));
  }
  const fs::path dir = prepare_out_dir(a.out_dir);
  const Eigen::Index row = a.row - 1;
  const auto base = decompose_corr_std(r);
  const Vector& sigma = base.std_devs();

  Table table({"kappa_max", "sigma", "sigma_rr", "alpha_rr", "sigma_me", "alpha_me",
               "sigma_spread"});
  out << "kappa(R)=" << fmt(r.condition_number()) << '\n';
  out << "kappa_max    sigma      sigma_RR   alpha_RR   sigma_ME   alpha_ME\n";
  for (double k : a.kappa_max) {
    const auto rr = ridge_regression(r, k);
    const auto me = min_eigenvalue(r, k);
    const Vector a_rr = equivalent_inflation_factor(rr.sigma_before, rr.sigma_after);
    const Vector a_me = equivalent_inflation_factor(me.sigma_before, me.sigma_after);
    // Largest variation of any per-variable quantity; zero for a circulant input.
    const double spread =
        std::max({sigma.maxCoeff() - sigma.minCoeff(),
                  rr.sigma_after.maxCoeff() - rr.sigma_after.minCoeff(),
                  me.sigma_after.maxCoeff() - me.sigma_after.minCoeff()});
    table.add({real(k), real(sigma.mean()), real(rr.sigma_after.mean()), real(a_rr.mean()),
               real(me.sigma_after.mean()), real(a_me.mean()), real(spread)});
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-10.6f %-10.6f %-10.6f %-10.6f %-10.6f\n",
                  fmt(k).c_str(), sigma.mean(), rr.sigma_after.mean(), a_rr.mean(),
                  me.sigma_after.mean(), a_me.mean());
    out << line;

    const auto c_rr = decompose_corr_std(rr.result);
    const auto c_me = decompose_corr_std(me.result);
    Table fig({"column", "c", "c_rr", "c_me", "pct_change_rr", "pct_change_me"});
    for (Eigen::Index j = 0; j < r.dim(); ++j) {
      const double c = base.correlations()(row, j);
      const double crr = c_rr.correlations()(row, j);
      const double cme = c_me.correlations()(row, j);
      const bool defined = c != 0.0;
      fig.add({std::to_string(j + 1), real(c), real(crr), real(cme),
               defined ? real(100.0 * (c - crr) / c) : std::string(),
               defined ? real(100.0 * (c - cme) / c) : std::string()});
    }
    fig.save(dir / ("correlations_row" + std::to_string(a.row) + "_kappa" +
                    kappa_label(k) + ".csv"));
  }
  table.save(dir / "table1.csv");
  return kExitOk;
}

// -------------------------------------------------------- da-experiment

struct DAArgs {
  std::uint64_t seed = 42;
  std::vector<double> kappa_max{10000.0, 1000.0, 100.0, 50.0, 10.0};
  std::optional<double> alpha_rr;
  std::optional<double> alpha_me;
  Eigen::Index n = 200;
  Eigen::Index samples = 250;
  int max_iter = 200;
  double tol = 1e-6;
  std::string weight = "inverse";
  std::string convention = "chord";
  std::string out_dir;
};

std::string solve_label(const VariantSolve& s) {
  std::string label(to_string(s.variant));
  if (s.kappa_max) label += "_k" + kappa_label(*s.kappa_max);
  return label;
}

int cmd_da_experiment(const DAArgs& a, std::ostream& out) {
  check_kappa_list(a.kappa_max);
  DAExperimentConfig cfg;
  cfg.seed = a.seed;
  cfg.kappa_max = a.kappa_max;
  cfg.alpha_rr = a.alpha_rr;
  cfg.alpha_me = a.alpha_me;
  cfg.n = a.n;
  cfg.m_samples = a.samples;
  cfg.cg.max_iterations = a.max_iter;
  cfg.cg.tolerance = a.tol;
  cfg.weight = parse_observation_weight(a.weight);
  cfg.convention = parse_distance_convention(a.convention);

  const DAExperimentResult res = run_da_experiment(cfg);
  const fs::path dir = prepare_out_dir(a.out_dir);

  Table t2({"variant", "kappa_max", "alpha", "kappa_r", "iterations", "converged",
            "final_relative_residual"});
  for (const auto& s : res.solves) {
    t2.add({std::string(to_string(s.variant)), s.kappa_max ? real(*s.kappa_max) : "",
            s.alpha ? real(*s.alpha) : "",
            s.kappa_r.is_infinite() ? "inf" : real(s.kappa_r.value()),
            std::to_string(s.cg.iterations), s.cg.converged ? "1" : "0",
            real(s.cg.final_relative_residual)});
  }
  t2.save(dir / "table2.csv");

  Table infl({"kappa_max", "alpha_rr_entry", "alpha_me_entry", "alpha_rr_mean",
              "alpha_me_mean"});
  for (const auto& m : res.inflation) {
    infl.add({real(m.kappa_max), real(m.alpha_rr_entry), real(m.alpha_me_entry),
              real(m.alpha_rr_mean), real(m.alpha_me_mean)});
  }
  infl.save(dir / "inflation.csv");

  std::vector<std::string> header{"frequency", "a_true"};
  for (const auto& s : res.solves) header.push_back(solve_label(s));
  Table dft(header);
  for (Eigen::Index f = 0; f < res.a_true.size(); ++f) {
    std::vector<std::string> row{std::to_string(f), real(res.a_true(f))};
    for (const auto& s : res.solves) row.push_back(real(s.dft(f)));
    dft.add(std::move(row));
  }
  dft.save(dir / "dft_coefficients.csv");

  // |a_est - a_true| - |a_mod - a_true|: positive where the modified R moves
  // the coefficient towards the truth.
  const Vector& a_est = res.find(Variant::kEstimated).dft;
  std::vector<std::string> corr_header{"frequency"};
  std::vector<const VariantSolve*> modified;
  for (const auto& s : res.solves) {
    if (s.kappa_max) {
      corr_header.push_back(solve_label(s));
      modified.push_back(&s);
    }
  }
  Table corr(corr_header);
  const Eigen::Index fmax = std::min<Eigen::Index>(20, res.a_true.size() - 1);
  for (Eigen::Index f = 0; f <= fmax; ++f) {
    std::vector<std::string> row{std::to_string(f)};
    const double e = std::abs(a_est(f) - res.a_true(f));
    for (const auto* s : modified) row.push_back(real(e - std::abs(s->dft(f) - res.a_true(f))));
    corr.add(std::move(row));
  }
  corr.save(dir / "dft_corrections.csv");

  out << "kappa(R_est)=" << fmt(res.kappa_est) << " sigma_est=[" << fmt(res.sigma_est_min)
      << "," << fmt(res.sigma_est_max) << "] weight=" << to_string(cfg.weight) << '\n';
  out << "TRUE iterations=" << res.find(Variant::kTrue).cg.iterations
      << " EST iterations=" << res.find(Variant::kEstimated).cg.iterations << '\n';
  out << "variant ";
  for (double k : cfg.kappa_max) out << ' ' << fmt(k);
  out << '\n';
  for (Variant v : {Variant::kRidge, Variant::kMinEig, Variant::kInflRidge,
                    Variant::kInflMinEig}) {
    out << to_string(v);
    for (double k : cfg.kappa_max) {
      const auto& s = res.find(v, k);
      out << ' ' << s.cg.iterations << (s.cg.converged ? "" : "*");
    }
    out << '\n';
  }
  out << "(* = iteration cap reached)\n";
  return kExitOk;
}

// ----------------------------------------------------------- kyfan-check

struct KyFanArgs {
  std::string matrix;
  double kappa_max = 0.0;
};

int cmd_kyfan_check(const KyFanArgs& a, std::ostream& out) {
  const CovarianceMatrix r = load_matrix_csv(a.matrix);
  const auto c = me_kyfan_condition(r, a.kappa_max);
  out << "kappa(R)=" << fmt(r.condition_number()) << '\n';
  out << "T=" << fmt(c.threshold, 10) << '\n';
  out << "l=" << c.l << '\n';
  out << "bound=" << c.bound << '\n';
  out << "satisfied=" << yes_no(c.satisfied) << " (kappa_max >= bound)\n";
  out << "satisfied_strict=" << yes_no(c.satisfied_strict) << " (kappa_max > bound)\n";
  out << "trace_distance=" << fmt(me_trace_distance(r, a.kappa_max), 10) << '\n';
  const auto lo = smallest_kyfan_kappa(r, false);
  const auto lo_strict = smallest_kyfan_kappa(r, true);
  out << "smallest_integer_kappa_max=" << (lo ? std::to_string(*lo) : "none")
      << " strict=" << (lo_strict ? std::to_string(*lo_strict) : "none") << '\n';
  return kExitOk;
}

void add_soar_options(CLI::App* sub, SoarArgs& s) {
  sub->add_option("--n", s.n, "Number of grid points")->capture_default_str();
  sub->add_option("--lengthscale", s.lengthscale, "SOAR lengthscale")->capture_default_str();
  sub->add_option("--variance", s.variance, "SOAR variance")->capture_default_str();
  sub->add_option("--convention", s.convention, "Distance on the circle: chord or arc")
      ->check(CLI::IsMember({"chord", "arc"}))
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariance reconditioning toolkit", "covrecon"};
  app.require_subcommand(1);
  const std::string out_help =
      std::string("Output directory (default: $") + kOutDirEnv + " or the current directory)";

  InfoArgs info;
  auto* s_info = app.add_subcommand("info", "Summarise a covariance matrix CSV");
  s_info->add_option("matrix", info.matrix, "Matrix CSV")->required();

  ReconditionArgs rec;
  auto* s_rec = app.add_subcommand("recondition", "Apply RR, ME or MVI to a matrix CSV");
  s_rec->add_option("matrix", rec.matrix, "Matrix CSV")->required();
  s_rec->add_option("--method", rec.method, "rr, me or mvi")
      ->required()
      ->check(CLI::IsMember({"rr", "me", "mvi"}));
  s_rec->add_option("--kappa-max", rec.kappa_max, "Target condition number (rr, me)");
  s_rec->add_option("--alpha", rec.alpha, "Inflation constant (mvi)");
  s_rec->add_option("--out", rec.out_dir, out_help);

  SoarMatrixArgs sm;
  sm.out_file = "soar.csv";
  auto* s_sm = app.add_subcommand("soar-matrix", "Write a SOAR covariance matrix CSV");
  add_soar_options(s_sm, sm.soar);
  s_sm->add_option("--out", sm.out_file,
                   "Output file; a bare file name is placed in the default output directory")
      ->capture_default_str();

  SoarExperimentArgs se;
  auto* s_se = app.add_subcommand("soar-experiment",
                                  "Standard deviation and correlation changes for SOAR");
  add_soar_options(s_se, se.soar);
  s_se->add_option("--kappa-max", se.kappa_max, "Comma-separated targets")
      ->delimiter(',')
      ->capture_default_str();
  s_se->add_option("--row", se.row, "1-based row of the correlation curves")
      ->capture_default_str();
  s_se->add_option("--out", se.out_dir, out_help);

  DAArgs da;
  auto* s_da = app.add_subcommand("da-experiment", "3D-Var convergence experiment");
  s_da->add_option("--seed", da.seed, "Sampling seed")->capture_default_str();
  s_da->add_option("--kappa-max", da.kappa_max, "Comma-separated targets")
      ->delimiter(',')
      ->capture_default_str();
  s_da->add_option("--alpha-rr", da.alpha_rr, "Fixed inflation constant for INFL_RR");
  s_da->add_option("--alpha-me", da.alpha_me, "Fixed inflation constant for INFL_ME");
  s_da->add_option("--n", da.n, "State dimension")->capture_default_str();
  s_da->add_option("--samples", da.samples, "Number of samples for R_est")
      ->capture_default_str();
  s_da->add_option("--max-iter", da.max_iter, "CG iteration cap")->capture_default_str();
  s_da->add_option("--tol", da.tol, "CG relative residual tolerance")->capture_default_str();
  s_da->add_option("--obs-weight", da.weight, "inverse (R^-1) or direct (R) in the Hessian")
      ->check(CLI::IsMember({"inverse", "direct"}))
      ->capture_default_str();
  s_da->add_option("--convention", da.convention, "Distance on the circle: chord or arc")
      ->check(CLI::IsMember({"chord", "arc"}))
      ->capture_default_str();
  s_da->add_option("--out", da.out_dir, out_help);

  KyFanArgs kf;
  auto* s_kf = app.add_subcommand("kyfan-check",
                                  "Check when ME is the trace-norm nearest matrix");
  s_kf->add_option("matrix", kf.matrix, "Matrix CSV")->required();
  s_kf->add_option("--kappa-max", kf.kappa_max, "Target condition number")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }

  try {
    if (*s_info) return cmd_info(info, out);
    if (*s_rec) return cmd_recondition(rec, out);
    if (*s_sm) return cmd_soar_matrix(sm, out);
    if (*s_se) return cmd_soar_experiment(se, out);
    if (*s_da) return cmd_da_experiment(da, out);
    if (*s_kf) return cmd_kyfan_check(kf, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitIo;
}

}  // namespace covrecon::cli
