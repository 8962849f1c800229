// Acceptance suite: one PASS/FAIL line per criterion, INFO lines for
// non-gating diagnostics. Exit status is nonzero when any criterion fails.

#include "commands.hpp"

#include "covrecon/assimilation.hpp"
#include "covrecon/errors.hpp"
#include "covrecon/generators.hpp"
#include "covrecon/kyfan.hpp"
#include "covrecon/recondition.hpp"

#include "../support.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace covrecon;
using namespace covrecon::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass;
  std::string detail;
};

int g_failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, const std::string& title, const std::function<Verdict()>& body,
            double time_limit_s = 0.0) {
  const auto start = Clock::now();
  Verdict v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double t = seconds_since(start);
  if (time_limit_s > 0.0 && t >= time_limit_s) {
    v.pass = false;
    v.detail += "; runtime over limit";
  }
  char timing[48];
  std::snprintf(timing, sizeof timing, " [%.2f s]", t);
  std::cout << (v.pass ? "PASS" : "FAIL") << "  C" << id << " " << title << ": " << v.detail
            << timing << std::endl;
  if (!v.pass) ++g_failures;
}

void info(const std::string& line) { std::cout << "INFO  " << line << std::endl; }

std::string num(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ------------------------------------------------------------------ C1

struct Table1Row {
  double kappa_max, sigma_rr, alpha_rr, sigma_me, alpha_me;
};

constexpr Table1Row kTable1[] = {
    {1000.0, 2.26471, 1.013, 2.25439, 1.008},
    {500.0, 2.29340, 1.026, 2.27599, 1.018},
    {100.0, 2.51306, 1.124, 2.45737, 1.099},
};
constexpr double kSoarKappa = 81121.71;

Verdict criterion_soar_std_devs() {
  std::ostringstream d;
  std::optional<DistanceConvention> calibrated;
  for (auto conv : {DistanceConvention::kChord, DistanceConvention::kArc}) {
    const double k = soar_matrix(SoarSpec{200, 0.2, 5.0, conv}).condition_number().value();
    const double rel = std::abs(k / kSoarKappa - 1.0);
    d << to_string(conv) << " kappa=" << num(k, 9) << " ";
    if (rel < 0.005 && !calibrated) calibrated = conv;
  }
  if (!calibrated) {
    d << "no convention within 0.5%; analytic identities apply instead";
    return {false, d.str()};
  }
  d << "calibrated=" << to_string(*calibrated) << ";";
  const auto r = soar_matrix(SoarSpec{200, 0.2, 5.0, *calibrated});
  double worst = 0.0;
  for (const auto& row : kTable1) {
    const auto rr = ridge_regression(r, row.kappa_max);
    const auto me = min_eigenvalue(r, row.kappa_max);
    const double srr = rr.sigma_after.mean();
    const double sme = me.sigma_after.mean();
    const double arr = equivalent_inflation_factor(rr.sigma_before, rr.sigma_after).mean();
    const double ame = equivalent_inflation_factor(me.sigma_before, me.sigma_after).mean();
    // Constant standard deviations: every variable must carry the same value.
    worst = std::max({worst, rr.sigma_after.maxCoeff() - rr.sigma_after.minCoeff(),
                      me.sigma_after.maxCoeff() - me.sigma_after.minCoeff()});
    worst = std::max({worst, std::abs(srr - row.sigma_rr), std::abs(sme - row.sigma_me),
                      std::abs(arr - row.alpha_rr), std::abs(ame - row.alpha_me)});
    d << " k=" << num(row.kappa_max) << " (" << num(srr) << "," << num(arr, 4) << ","
      << num(sme) << "," << num(ame, 4) << ")";
  }
  d << "; max abs deviation " << num(worst, 3) << " (tol 1e-3)";
  return {worst <= 1e-3, d.str()};
}

// ------------------------------------------------------------------ C2

Verdict criterion_analytic_identities() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dim(2, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad_kappa = 0, bad_delta = 0, bad_bound = 0, bad_order = 0, bad_shrink = 0, bad_mvi = 0;
  double worst_kappa = 0.0, worst_delta = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const Eigen::Index d = dim(rng);
    const auto r = CovarianceMatrix::validate(random_spd(rng, d));
    const double kappa = r.condition_number().value();
    const double kmax = std::pow(kappa, 0.05 + 0.9 * u(rng));
    const auto rr = ridge_regression(r, kmax);
    const auto me = min_eigenvalue(r, kmax);

    const double e_rr = rel_diff(oracle_condition_number(rr.result.entries()), kmax);
    const double e_me = rel_diff(oracle_condition_number(me.result.entries()), kmax);
    worst_kappa = std::max({worst_kappa, e_rr, e_me});
    if (e_rr > 1e-8 || e_me > 1e-8) ++bad_kappa;

    const Vector s = r.variances().cwiseSqrt();
    const double delta = rr.parameter;
    const double lambda_d = r.spectrum().smallest();
    const double t_me = me.parameter;
    bool ok_delta = true, ok_bound = true, ok_order = true;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double e = std::abs(rr.sigma_after(i) * rr.sigma_after(i) - s(i) * s(i) - delta);
      worst_delta = std::max(worst_delta, e);
      ok_delta &= e <= 1e-10;
      // Relative slack of a few ulps for the square roots.
      ok_bound &= me.sigma_after(i) >= s(i) * (1.0 - 4e-16) &&
                  me.sigma_after(i) <= std::sqrt(s(i) * s(i) + t_me - lambda_d) * (1.0 + 4e-16);
      ok_order &= me.sigma_after(i) < rr.sigma_after(i);
    }
    bad_delta += !ok_delta;
    bad_bound += !ok_bound;
    bad_order += !ok_order;

    const auto c = decompose_corr_std(r).correlations().entries();
    const auto c_rr = decompose_corr_std(rr.result).correlations().entries();
    bool ok_shrink = true;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) {
        if (i != j && c(i, j) != 0.0) ok_shrink &= std::abs(c_rr(i, j)) < std::abs(c(i, j));
      }
    }
    bad_shrink += !ok_shrink;

    const auto mv = mvi(r, 0.5 + 2.5 * u(rng));
    const bool ok_mvi =
        mv.kappa_after == kappa &&
        rel_diff(oracle_condition_number(mv.result.entries()),
                 oracle_condition_number(r.entries())) < 1e-8 &&
        max_abs_diff(decompose_corr_std(mv.result).correlations().entries(), c) <= 1e-12;
    bad_mvi += !ok_mvi;
  }
  std::ostringstream d;
  d << trials << " matrices; kappa target misses=" << bad_kappa << " (worst rel "
    << num(worst_kappa, 3) << "), delta misses=" << bad_delta << " (worst "
    << num(worst_delta, 3) << "), ME bound misses=" << bad_bound
    << ", ME<RR misses=" << bad_order << ", RR shrink misses=" << bad_shrink
    << ", MVI invariance misses=" << bad_mvi;
  const bool pass = bad_kappa + bad_delta + bad_bound + bad_order + bad_shrink + bad_mvi == 0;
  return {pass, d.str()};
}

// ------------------------------------------------------------------ C3

// Range of (J - J_RR) / (1/2 q^T V L V^T q) across the problems.
double halved_ratio_min = std::numeric_limits<double>::infinity();
double halved_ratio_max = 0.0;

Verdict criterion_objective_identities() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(2, 30);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int negative = 0;
  const int problems = 50;
  for (int t = 0; t < problems; ++t) {
    const Eigen::Index n = dim(rng);
    const DAProblem p{CovarianceMatrix::validate(random_spd(rng, n)),
                      CovarianceMatrix::validate(random_spd(rng, n)),
                      random_gaussian(rng, n, n), random_gaussian(rng, n, 1),
                      random_gaussian(rng, n, 1)};
    const double kmax = std::pow(p.r.condition_number().value(), 0.1 + 0.8 * u(rng));
    const double alpha = 1.0 + u(rng);
    const auto rr = ridge_regression(p.r, kmax);
    const auto me = min_eigenvalue(p.r, kmax);
    const auto mv = mvi(p.r, alpha);
    const auto c_rr = inverse_correction_spectrum(rr, p.r.spectrum());
    const auto c_me = inverse_correction_spectrum(me, p.r.spectrum());

    const Vector x = random_gaussian(rng, n, 1);
    const auto j = evaluate_objective(p, x);
    const Vector q = p.y - p.h * x;
    const auto with_r = [&](const CovarianceMatrix& r) {
      DAProblem m = p;
      m.r = r;
      return evaluate_objective(m, x).total;
    };
    const double red_rr = observation_term_reduction(c_rr, p.r.spectrum(), q);
    const double red_me = observation_term_reduction(c_me, p.r.spectrum(), q);
    worst = std::max({worst, rel_diff(with_r(rr.result), j.total - red_rr),
                      rel_diff(with_r(me.result), j.total - red_me),
                      rel_diff(with_r(mv.result), j.background + j.observation / (alpha * alpha))});

    // How the actual drop compares with the halved quadratic form.
    const double j_rr = with_r(rr.result);
    if (red_rr > 0.0) {
      const double ratio = (j.total - j_rr) / red_rr;
      halved_ratio_min = std::min(halved_ratio_min, ratio);
      halved_ratio_max = std::max(halved_ratio_max, ratio);
    }

    for (int k = 0; k < 100; ++k) {
      const Vector xk = random_gaussian(rng, n, 1);
      const Vector qk = p.y - p.h * xk;
      if (observation_term_reduction(c_rr, p.r.spectrum(), qk) < 0.0) ++negative;
      if (observation_term_reduction(c_me, p.r.spectrum(), qk) < 0.0) ++negative;
    }
  }
  std::ostringstream d;
  d << problems << " problems; worst relative mismatch " << num(worst, 3)
    << " (tol 1e-8); negative correction forms " << negative << "/" << problems * 200;
  return {worst <= 1e-8 && negative == 0, d.str()};
}

// ------------------------------------------------------------------ C4

constexpr long kReferenceKyFanKappa = 168;

Verdict criterion_kyfan() {
  std::ostringstream d;
  const auto soar = soar_matrix(SoarSpec{});
  const auto k = smallest_kyfan_kappa(soar, false);
  const auto ks = smallest_kyfan_kappa(soar, true);
  const auto at = me_kyfan_condition(soar, static_cast<double>(kReferenceKyFanKappa));
  d << "smallest satisfying kappa_max=" << (k ? std::to_string(*k) : "none")
    << " (strict " << (ks ? std::to_string(*ks) : "none") << "), expected "
    << kReferenceKyFanKappa << "; at " << kReferenceKyFanKappa << ": l=" << at.l
    << " bound=" << at.bound << ";";
  const bool smallest_ok = (k && *k == kReferenceKyFanKappa) ||
                           (ks && *ks == kReferenceKyFanKappa);

  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> dim(2, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int cases = 0, beaten = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  KyFanOracleOptions opts;
  opts.trials = 10000;
  while (cases < 12) {
    const Eigen::Index dd = dim(rng);
    Vector ev(dd);
    for (Eigen::Index i = 0; i < dd; ++i) ev(i) = std::exp(6.0 * u(rng));
    std::sort(ev.begin(), ev.end(), std::greater<>());
    const auto r = CovarianceMatrix::validate(with_eigenvalues(rng, ev));
    const double kappa = r.condition_number().value();
    if (kappa < 3.0) continue;
    const double kmax = 1.0 + (kappa - 1.0) * (0.05 + 0.9 * u(rng));
    if (!me_kyfan_condition(r, kmax).satisfied) continue;
    ++cases;
    opts.seed = static_cast<std::uint64_t>(cases);
    const double best = kyfan_minimizer_oracle(r, kmax, opts);
    const double me = me_trace_distance(r, kmax);
    worst_gap = std::max(worst_gap, me - best);
    if (best < me - 1e-6) ++beaten;
  }
  d << " oracle: " << cases << " matrices x " << opts.trials << " trials, ME beaten in "
    << beaten << " (largest ME excess " << num(worst_gap, 3) << ")";
  return {smallest_ok && beaten == 0, d.str()};
}

// ------------------------------------------------------------------ C5/C6

struct Table2Ref {
  Variant variant;
  std::vector<double> counts;  // per kappa_max in kDaKappas order
};

const std::vector<double> kDaKappas{10000.0, 1000.0, 100.0, 50.0, 10.0};
constexpr double kRefTrue = 17.0;
constexpr double kRefEst = 244.0;
const std::vector<Table2Ref> kTable2{
    {Variant::kRidge, {245, 244, 170, 141, 73}},
    {Variant::kMinEig, {240, 239, 193, 145, 76}},
    {Variant::kInflRidge, {244, 244, 238, 233, 199}},
};

std::map<std::pair<std::uint64_t, int>, DAExperimentResult> g_da_cache;

const DAExperimentResult& da_result(std::uint64_t seed, ObservationWeight w = ObservationWeight::kInverse,
                                    int max_iter = 200) {
  const auto key = std::make_pair(seed, static_cast<int>(w) * 100000 + max_iter);
  auto it = g_da_cache.find(key);
  if (it == g_da_cache.end()) {
    DAExperimentConfig cfg;
    cfg.seed = seed;
    cfg.weight = w;
    cfg.cg.max_iterations = max_iter;
    it = g_da_cache.emplace(key, run_da_experiment(cfg)).first;
  }
  return it->second;
}

std::vector<int> row_of(const DAExperimentResult& res, Variant v) {
  std::vector<int> out;
  for (double k : kDaKappas) out.push_back(res.find(v, k).cg.iterations);
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "/" : "") + std::to_string(v[i]);
  return s;
}

struct DaChecks {
  bool a, b, c, d;
  std::string detail;
};

DaChecks da_checks(const DAExperimentResult& res) {
  DaChecks out{true, true, true, true, ""};
  std::ostringstream s;
  const int it_true = res.find(Variant::kTrue).cg.iterations;
  const int it_est = res.find(Variant::kEstimated).cg.iterations;
  out.a = it_true <= 25 && it_est >= 150;
  s << "TRUE=" << it_true << " EST=" << it_est;
  for (Variant v : {Variant::kRidge, Variant::kMinEig}) {
    const auto row = row_of(res, v);
    bool mono = true;
    for (std::size_t i = 1; i < row.size(); ++i) mono &= row[i] <= row[i - 1];
    out.b &= mono && row.back() <= 0.6 * row.front();
    s << " " << to_string(v) << "=" << join(row);
  }
  for (Variant v : {Variant::kInflRidge, Variant::kInflMinEig}) {
    const auto row = row_of(res, v);
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    out.c &= hi != row.end() && (*hi - *lo) < 0.25 * *hi;
    s << " " << to_string(v) << "=" << join(row);
  }
  const auto within = [](double got, double ref) { return std::abs(got - ref) <= 0.15 * ref; };
  int misses = 0, total = 2;
  misses += !within(it_true, kRefTrue);
  misses += !within(it_est, kRefEst);
  for (const auto& ref : kTable2) {
    const auto row = row_of(res, ref.variant);
    for (std::size_t i = 0; i < row.size(); ++i) {
      ++total;
      misses += !within(row[i], ref.counts[i]);
    }
  }
  out.d = misses == 0;
  s << "; reference entries outside +-15%: " << misses << "/" << total;
  out.detail = s.str();
  return out;
}

const std::vector<std::uint64_t> kSeeds{42, 1, 2, 3, 4};

Verdict criterion_da_experiment() {
  bool a = true, b = true, c = true;
  std::ostringstream d;
  for (auto seed : kSeeds) {
    const auto chk = da_checks(da_result(seed));
    a &= chk.a;
    b &= chk.b;
    c &= chk.c;
    if (seed == kSeeds.front()) d << "seed " << seed << ": " << chk.detail;
  }
  const auto first = da_checks(da_result(kSeeds.front()));
  d << "; over " << kSeeds.size() << " seeds (a)=" << (a ? "ok" : "fail")
    << " (b)=" << (b ? "ok" : "fail") << " (c)=" << (c ? "ok" : "fail")
    << " (d, seed " << kSeeds.front() << ")=" << (first.d ? "ok" : "fail");
  return {a && b && c && first.d, d.str()};
}

bool dft_seed_ok(const DAExperimentResult& res, std::string* detail) {
  const Vector& a_true = res.a_true;
  const Vector& a_est = res.find(Variant::kEstimated).dft;
  const Vector& a_rr = res.find(Variant::kRidge, 100.0).dft;
  const Vector& a_me = res.find(Variant::kMinEig, 100.0).dft;
  const Vector& a_irr = res.find(Variant::kInflRidge, 100.0).dft;
  const Vector& a_ime = res.find(Variant::kInflMinEig, 100.0).dft;
  bool ok = true;
  std::ostringstream s;
  for (int k : {7, 12, 15}) {
    const double e_est = std::abs(a_est(k) - a_true(k));
    const bool away = std::abs(a_rr(k) - a_true(k)) > e_est && std::abs(a_me(k) - a_true(k)) > e_est;
    const double ch = std::min(std::abs(a_rr(k) - a_est(k)), std::abs(a_me(k) - a_est(k)));
    const bool smaller = std::abs(a_irr(k) - a_est(k)) < ch && std::abs(a_ime(k) - a_est(k)) < ch;
    ok &= away && smaller;
    s << " k" << k << ":" << (away ? "away" : "NOT-away") << "/"
      << (smaller ? "mvi-smaller" : "mvi-NOT-smaller");
  }
  if (detail) *detail = s.str();
  return ok;
}

Verdict criterion_dft() {
  std::ostringstream d;
  const Vector a = dft_imag(truth_signal(200));
  bool support_ok = true;
  double off_max = 0.0, on_min = std::numeric_limits<double>::infinity();
  for (int f = 0; f < 200; ++f) {
    const int g = std::min(f, 200 - f);
    const bool active = g == 1 || g == 7 || g == 12 || g == 15 || g == 45;
    if (active) {
      on_min = std::min(on_min, std::abs(a(f)));
    } else {
      off_max = std::max(off_max, std::abs(a(f)));
    }
  }
  support_ok = on_min > 10.0 && off_max < 1e-9;
  d << "a_true support: min active " << num(on_min) << ", max inactive " << num(off_max, 3)
    << ";";
  int passing = 0;
  for (auto seed : kSeeds) {
    std::string detail;
    const bool ok = dft_seed_ok(da_result(seed), &detail);
    passing += ok;
    if (seed == kSeeds.front()) d << " seed " << seed << ":" << detail << ";";
  }
  d << " seeds passing " << passing << "/" << kSeeds.size();
  return {support_ok && passing * 2 > static_cast<int>(kSeeds.size()), d.str()};
}

// ------------------------------------------------------------------ C7

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict criterion_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "covrecon_acceptance";
  fs::remove_all(root);
  std::ostringstream sink;
  for (const char* run : {"a", "b"}) {
    const std::vector<std::string> args{"covrecon", "da-experiment", "--seed", "42", "--out",
                                        (root / run).string()};
    const int code = cli::run(args, sink, sink);
    if (code != 0) return {false, "da-experiment exited with " + std::to_string(code)};
  }
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const auto other = root / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differ;
  }
  std::ostringstream d;
  d << files << " CSV files compared, " << differ << " differ";
  return {files > 0 && differ == 0, d.str()};
}

}  // namespace

int main() {
  std::cout << "covrecon acceptance suite" << std::endl;

  report(1, "SOAR standard deviation changes", criterion_soar_std_devs, 10.0);
  report(2, "analytic identities on random PSD matrices", criterion_analytic_identities);
  report(3, "objective correction identities", criterion_objective_identities, 5.0);
  info("(J - J_RR) / (1/2 q^T V L V^T q) lies in [" + num(halved_ratio_min, 12) + ", " +
       num(halved_ratio_max, 12) + "]; without the 1/2 the subtracted term is twice the drop");
  report(4, "Ky Fan equivalence", criterion_kyfan, 30.0);

  const auto start5 = Clock::now();
  report(5, "DA convergence (inverse-weighted Hessian, 200-iteration cap)",
         criterion_da_experiment, 120.0);
  report(6, "DFT scale behaviour", criterion_dft);
  report(7, "determinism of da-experiment CSVs", criterion_determinism);

  // Diagnostic: the same predicates with R entering the Hessian directly and
  // no effective iteration cap.
  for (int cap : {200, 1000}) {
    const auto& res = da_result(42, ObservationWeight::kDirect, cap);
    const auto chk = da_checks(res);
    info("direct weight, cap " + std::to_string(cap) + ", seed 42: " + chk.detail +
         " | (a)=" + (chk.a ? "ok" : "fail") + " (b)=" + (chk.b ? "ok" : "fail") +
         " (c)=" + (chk.c ? "ok" : "fail") + " (d)=" + (chk.d ? "ok" : "fail"));
  }
  info("DA experiments total " + num(seconds_since(start5), 3) + " s");

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASS" : std::to_string(g_failures) +
                                                          " CRITERION(S) FAILED")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
