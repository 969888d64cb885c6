// Acceptance suite: runs the ten scientific checks the project promises,
// one line per criterion. `acceptance` runs everything; `acceptance
// --criterion N` runs a single one (the form the ctest entries use).

#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mixedsde/analysis.hpp"
#include "mixedsde/parallel.hpp"
#include "mixedsde/scheme.hpp"
#include "mixedsde/textio.hpp"

using namespace mixedsde;

namespace {

constexpr std::uint64_t kSuiteSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

// The standard desk-scale plan: fine grid 2^16, coarse factors 16..512,
// 2000 coupled paths.
CouplingPlan standard_plan(double hurst, int workers = 0) {
  CouplingPlan plan;
  plan.fine_steps = 1 << 16;
  plan.factors = {16, 32, 64, 128, 256, 512};
  plan.paths = 2000;
  plan.horizon = 1.0;
  plan.h = HurstIndex::checked(hurst);
  plan.model = find_builtin_model("trig", plan.h);
  plan.base_seed = kSuiteSeed;
  plan.sampler = SamplerKind::kAuto;  // resolves to circulant at 2^16
  plan.workers = workers;
  return plan;
}

std::string describe_fit(const ErrorReport& report) {
  const RateFit& fit = *report.fit;
  return "slope=" + fmt(fit.slope) + " ci=[" + fmt(fit.ci_lo) + "," + fmt(fit.ci_hi) +
         "] theoretical=" + fmt(report.theoretical_slope);
}

// Criterion 1: fitted slope in [0.12, 0.28] with the 95% CI containing
// 2H-1 = 0.2 for H = 0.6.
Outcome criterion_rate_below_threshold() {
  const ErrorReport report = strong_error(standard_plan(0.6));
  const RateFit& fit = *report.fit;
  const bool in_band = fit.slope >= 0.12 && fit.slope <= 0.28;
  const bool ci_covers = fit.ci_lo <= 0.2 && 0.2 <= fit.ci_hi;
  return {in_band && ci_covers,
          describe_fit(report) + " band=[0.12,0.28] in_band=" + (in_band ? "yes" : "no") +
              " ci_covers=" + (ci_covers ? "yes" : "no")};
}

// Criterion 2: H = 0.9, slope in [0.40, 0.60], CI containing 0.5.
Outcome criterion_rate_above_threshold() {
  const ErrorReport report = strong_error(standard_plan(0.9));
  const RateFit& fit = *report.fit;
  const bool in_band = fit.slope >= 0.40 && fit.slope <= 0.60;
  const bool ci_covers = fit.ci_lo <= 0.5 && 0.5 <= fit.ci_hi;
  return {in_band && ci_covers,
          describe_fit(report) + " band=[0.40,0.60] in_band=" + (in_band ? "yes" : "no") +
              " ci_covers=" + (ci_covers ? "yes" : "no")};
}

// Criterion 3: theoretical_rate is continuous at H = 3/4 and equals 1/2
// there; fitted slopes on either side are ordered slope(0.7) <
// slope(0.8), and the joint CIs do not contradict the ordering.
Outcome criterion_phase_transition() {
  const double at = theoretical_rate(HurstIndex::checked(0.75));
  const double below = theoretical_rate(HurstIndex::checked(0.75 - 1e-9));
  const double above = theoretical_rate(HurstIndex::checked(0.75 + 1e-9));
  const bool continuous =
      at == 0.5 && std::abs(below - 0.5) < 1e-8 && std::abs(above - 0.5) < 1e-8;

  const ErrorReport low = strong_error(standard_plan(0.7));
  const ErrorReport high = strong_error(standard_plan(0.8));
  const bool ordered = low.fit->slope < high.fit->slope;
  const bool cis_consistent = low.fit->ci_lo < high.fit->ci_hi;
  return {continuous && ordered && cis_consistent,
          "rate(0.75)=" + fmt(at) + " slope(0.7)=" + fmt(low.fit->slope) + " ci=[" +
              fmt(low.fit->ci_lo) + "," + fmt(low.fit->ci_hi) + "] slope(0.8)=" +
              fmt(high.fit->slope) + " ci=[" + fmt(high.fit->ci_lo) + "," +
              fmt(high.fit->ci_hi) + "] ordered=" + (ordered ? "yes" : "no")};
}

// Criterion 4: the additive model is exact at every mesh.
Outcome criterion_exactness_oracle() {
  CouplingPlan plan = standard_plan(0.75);
  plan.model = make_additive_model(1.0, 1.0, 1.0, 0.0);
  plan.paths = 200;  // exactness is per-path, not statistical
  const ErrorReport report = strong_error(plan);
  double worst = 0.0;
  for (const auto& r : report.records) worst = std::max(worst, r.rmse);
  return {report.exact && worst < 1e-12,
          "max rmse=" + format_float(worst) + " exact=" + (report.exact ? "yes" : "no")};
}

// Criterion 5: empirical fGn covariance matches the analytic one for
// both samplers at N = 64 and H in {0.6, 0.75, 0.9} (all |z| < 4), and
// the analytic variance of the summed increments reproduces T^{2H} to
// 1e-12.
Outcome criterion_noise_fidelity() {
  const GridSpec grid = GridSpec::make(1.0, 64);
  std::string detail;
  bool pass = true;
  for (const double hurst : {0.6, 0.75, 0.9}) {
    const HurstIndex h = HurstIndex::checked(hurst);
    for (const SamplerKind kind : {SamplerKind::kCholesky, SamplerKind::kCirculant}) {
      const auto table = fgn_covariance_table(grid, h, kind, 100000,
                                              kSuiteSeed + static_cast<std::uint64_t>(100 * hurst));
      double worst = 0.0;
      for (const auto& row : table) worst = std::max(worst, std::abs(row.z));
      pass = pass && worst < 4.0;
      detail += (kind == SamplerKind::kCholesky ? "chol" : "circ") + std::string("(H=") +
                fmt(hurst) + ") worst|z|=" + fmt(worst) + " ";
    }
    // Parseval-style identity, evaluated analytically.
    NeumaierSum sum;
    sum.add(static_cast<double>(grid.steps) * fgn_covariance(0, h, grid.mesh));
    for (std::int64_t k = 1; k < grid.steps; ++k) {
      sum.add(2.0 * static_cast<double>(grid.steps - k) * fgn_covariance(k, h, grid.mesh));
    }
    const double target = std::pow(grid.horizon, 2.0 * hurst);
    const double relative = std::abs(sum.value() - target) / target;
    pass = pass && relative < 1e-12;
    detail += "sum_var_rel_err=" + format_float(relative) + " ";
  }
  return {pass, detail};
}

// Criterion 6: the discrete Gronwall majorant dominates 1000 random
// recursions satisfying the hypothesis, with zero violations.
Outcome criterion_gronwall() {
  std::mt19937_64 rng(kSuiteSeed);
  std::uniform_real_distribution<double> x0_dist(0.0, 10.0);
  std::uniform_real_distribution<double> k_dist(0.01, 5.0);
  std::uniform_real_distribution<double> delta_dist(0.001, 0.5);
  std::uniform_int_distribution<std::int64_t> n_dist(1, 1000);
  std::uniform_real_distribution<double> slack(0.0, 1.0);
  std::int64_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double x0 = x0_dist(rng);
    const double k = k_dist(rng);
    const double delta = delta_dist(rng);
    const std::int64_t n = n_dist(rng);
    double x = x0;
    for (std::int64_t step = 1; step <= n; ++step) {
      x = slack(rng) * (x * (1.0 + k * delta) + k * delta);
      if (x > discrete_gronwall_bound(x0, k, delta, step)) ++violations;
    }
  }
  return {violations == 0, "violations=" + std::to_string(violations) + "/1000 recursions"};
}

// Criterion 7: the discrete Malliavin product formula matches the
// eps=1e-6 pathwise finite-difference oracle within 1e-4 relative error
// on 100 random (seed, k0, n) triples for trig with N = 16.
Outcome criterion_malliavin_product() {
  const HurstIndex h = HurstIndex::checked(0.75);
  const ModelSpec trig = find_builtin_model("trig", h);
  const GridSpec grid = GridSpec::make(1.0, 16);
  const NoiseSampler sampler(grid, h);
  std::mt19937_64 rng(kSuiteSeed + 7);
  std::uniform_int_distribution<std::int64_t> k0_dist(0, 15);
  const double eps = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const NoisePath noise = sampler.sample(derive_seed(kSuiteSeed, 7000 + trial));
    const std::int64_t k0 = k0_dist(rng);
    std::uniform_int_distribution<std::int64_t> n_dist(k0 + 1, 16);
    const std::int64_t n = n_dist(rng);
    const Trajectory base = euler_path(trig, noise);
    const double exact = stochastic_derivative_product(base, k0, n);
    NoisePath bumped = noise;
    bumped.fractional[static_cast<std::size_t>(k0)] += eps;
    const Trajectory shifted = euler_path(trig, bumped);
    const double fd = (shifted.values[static_cast<std::size_t>(n)] -
                       base.values[static_cast<std::size_t>(n)]) /
                      eps;
    worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1e-12));
  }
  return {worst < 1e-4, "worst relative error=" + format_float(worst) + " over 100 triples"};
}

// Criterion 8: E|D_s X_T|^2 and E[(X_T)^4] vary by < 30% across N in
// {2^6..2^12}; the within-cell displacement moment has log-log slope
// 1.0 +- 0.15 over meshes 2^-4..2^-10.
Outcome criterion_uniform_moments() {
  const HurstIndex h = HurstIndex::checked(0.75);
  const ModelSpec trig = find_builtin_model("trig", h);
  const std::int64_t paths = 10000;

  double derivative_lo = 0.0, derivative_hi = 0.0;
  double terminal_lo = 0.0, terminal_hi = 0.0;
  bool first = true;
  for (std::int64_t n = 64; n <= 4096; n *= 2) {
    const GridSpec grid = GridSpec::make(1.0, n);
    const double d = derivative_moment_check(trig, h, grid, 2, paths, kSuiteSeed + 8,
                                             SamplerKind::kCirculant)
                         .estimate;
    const double t = terminal_moment_check(trig, h, grid, 4, paths, kSuiteSeed + 9,
                                           SamplerKind::kCirculant)
                         .estimate;
    if (first) {
      derivative_lo = derivative_hi = d;
      terminal_lo = terminal_hi = t;
      first = false;
    } else {
      derivative_lo = std::min(derivative_lo, d);
      derivative_hi = std::max(derivative_hi, d);
      terminal_lo = std::min(terminal_lo, t);
      terminal_hi = std::max(terminal_hi, t);
    }
  }
  const double derivative_variation = (derivative_hi - derivative_lo) / derivative_lo;
  const double terminal_variation = (terminal_hi - terminal_lo) / terminal_lo;

  const std::vector<std::int64_t> meshes = {16, 32, 64, 128, 256, 512, 1024};
  const auto continuity = grid_continuity_sweep(trig, h, meshes, 1.0, paths, kSuiteSeed + 10,
                                                SamplerKind::kCirculant);
  const RateFit fit = fit_rate(continuity);

  const bool pass = derivative_variation < 0.30 && terminal_variation < 0.30 &&
                    std::abs(fit.slope - 1.0) <= 0.15;
  return {pass, "derivative variation=" + fmt(derivative_variation) + " terminal variation=" +
                    fmt(terminal_variation) + " continuity slope=" + fmt(fit.slope)};
}

// Criterion 9: Monte Carlo exponential moment stays within 3 standard
// errors of the closed-form bound at (M=1, T=1, N=2^10, H=0.75), and
// the Brownian factor matches its closed form.
Outcome criterion_exponential_moment() {
  const GridSpec grid = GridSpec::make(1.0, 1024);
  const auto result = exp_moment_check(1.0, grid, HurstIndex::checked(0.75), 100000,
                                       kSuiteSeed + 11, SamplerKind::kCirculant);
  const bool below = result.estimate <= result.bound + 3.0 * result.estimate_se;
  const bool brownian_ok =
      std::abs(result.brownian_estimate - result.brownian_closed_form) <=
      3.0 * result.brownian_se;
  return {below && brownian_ok,
          "estimate=" + fmt(result.estimate) + " (se " + fmt(result.estimate_se) + ") bound=" +
              fmt(result.bound) + " brownian=" + fmt(result.brownian_estimate) +
              " closed form=" + fmt(result.brownian_closed_form)};
}

// Criterion 10: rerunning the criterion-1 plan with a different worker
// count yields byte-identical errors.csv.
Outcome criterion_reproducibility() {
  std::string csv[2];
  const int workers[2] = {2, 3};
  for (int i = 0; i < 2; ++i) {
    const ErrorReport report = strong_error(standard_plan(0.6, workers[i]));
    std::ostringstream out;
    write_error_csv(report, out);
    csv[i] = out.str();
  }
  const bool identical = !csv[0].empty() && csv[0] == csv[1];
  return {identical, std::string("errors.csv byte-identical across workers {2,3}: ") +
                         (identical ? "yes" : "no")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "rate-below-threshold", criterion_rate_below_threshold},
      {2, "rate-above-threshold", criterion_rate_above_threshold},
      {3, "phase-transition", criterion_phase_transition},
      {4, "exactness-oracle", criterion_exactness_oracle},
      {5, "noise-fidelity", criterion_noise_fidelity},
      {6, "gronwall-property", criterion_gronwall},
      {7, "malliavin-product", criterion_malliavin_product},
      {8, "uniform-moments", criterion_uniform_moments},
      {9, "exponential-moment", criterion_exponential_moment},
      {10, "reproducibility", criterion_reproducibility},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected = std::atoi(argv[i + 1]);
      ++i;
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }

  bool all_pass = true;
  for (const Criterion& criterion : criteria()) {
    if (selected != 0 && criterion.id != selected) continue;
    const Outcome outcome = criterion.run();
    all_pass = all_pass && outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << criterion.id << " ("
              << criterion.name << "): " << outcome.detail << std::endl;
  }
  return all_pass ? 0 : 1;
}
