#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mixedsde/model.hpp"
#include "mixedsde/noise.hpp"
#include "mixedsde/scheme.hpp"

namespace mixedsde {

/// Coupled fine/coarse Monte Carlo plan for the strong-error study.
/// Every coarse grid is driven by block sums of the same fine noise
/// realization, so the difference at shared nodes isolates the
/// discretization error.
struct CouplingPlan {
  std::int64_t fine_steps = 0;
  std::vector<std::int64_t> factors;  // coarse grids have fine_steps / m
  std::int64_t paths = 0;
  double horizon = 1.0;
  HurstIndex h = HurstIndex::degenerate_brownian();
  ModelSpec model;
  std::uint64_t base_seed = 0;
  SamplerKind sampler = SamplerKind::kAuto;
  int workers = 0;  // 0 = hardware

  /// Throws PlanError naming the offending entry. Requires >= 3
  /// factors, each m >= 8 dividing fine_steps (the reference mesh must
  /// keep at least an 8x margin below every coarse mesh), strictly
  /// increasing.
  void validate() const;
};

/// One log-log regression point.
struct RatePoint {
  double delta = 0.0;
  double value = 0.0;    // rmse or a moment estimate, > 0
  double stderr_ = 0.0;  // Monte Carlo standard error of value
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci_lo = 0.0;  // 95% interval
  double ci_hi = 0.0;
};

struct ErrorRecord {
  std::int64_t factor = 0;
  double delta = 0.0;
  double rmse = 0.0;
  double stderr_ = 0.0;
};

struct ErrorReport {
  std::vector<ErrorRecord> records;  // deltas strictly increasing
  std::optional<RateFit> fit;        // absent when the scheme is exact
  double theoretical_slope = 0.0;
  std::int64_t paths_used = 0;
  std::int64_t paths_aborted = 0;
  bool exact = false;  // every rmse below the exactness threshold

  // Provenance, for the metadata companion file.
  std::string model_name;
  double hurst = 0.0;
  double horizon = 0.0;
  std::int64_t fine_steps = 0;
  std::uint64_t base_seed = 0;
  std::int64_t paths_requested = 0;
  std::string sampler;
};

/// rmse below this is reported as exact coincidence instead of fitted.
inline constexpr double kExactnessThreshold = 1e-12;

/// Block sums of increments: coarse[j] = sum of fine[j m .. (j+1)m - 1].
std::vector<double> aggregate_increments(std::span<const double> fine, std::int64_t factor);

/// Runs the coupled experiment. Deterministic in the plan (including
/// base_seed) for any worker count. Paths whose Euler recursion
/// produces a non-finite state are counted and excluded; the run fails
/// if more than 0.01% of paths abort.
ErrorReport strong_error(const CouplingPlan& plan);

/// min(1/2, 2h - 1): the worst of the Brownian and fractional rates.
double theoretical_rate(HurstIndex h);

/// Weighted least squares of log(value) on log(delta); weights are
/// 1/(relative stderr)^2. With all stderr zero, falls back to an
/// unweighted fit with residual-based slope error.
RateFit fit_rate(std::span<const RatePoint> points);

/// Discrete stochastic derivative D_s X^δ_{ν_n} for s in
/// [ν_{k0}, ν_{k0+1}): c(X_{ν_k0}) times the product of
/// (1 + a_x δ + b_x ΔW_k + c' ΔB^H_k) over k = k0+1 .. n-1 (empty
/// product = 1).
double stochastic_derivative_product(const Trajectory& trajectory, std::int64_t s_index,
                                     std::int64_t n_index);

struct MomentEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Monte Carlo E|D_s X^δ_T|^p with s at mid-horizon, p in {2, 4}.
MomentEstimate derivative_moment_check(const ModelSpec& model, HurstIndex h,
                                       const GridSpec& grid, int p, std::int64_t paths,
                                       std::uint64_t base_seed,
                                       SamplerKind sampler = SamplerKind::kAuto,
                                       int workers = 0);

/// Monte Carlo E[(X^δ_T)^p].
MomentEstimate terminal_moment_check(const ModelSpec& model, HurstIndex h,
                                     const GridSpec& grid, int p, std::int64_t paths,
                                     std::uint64_t base_seed,
                                     SamplerKind sampler = SamplerKind::kAuto,
                                     int workers = 0);

/// Monte Carlo E|X^δ_s - X^δ_{t^δ_s}|^2 pooled over cell midpoints, one
/// value per mesh; the bridge increments come from a 2x refinement.
std::vector<RatePoint> grid_continuity_sweep(const ModelSpec& model, HurstIndex h,
                                             std::span<const std::int64_t> step_counts,
                                             double horizon, std::int64_t paths,
                                             std::uint64_t base_seed,
                                             SamplerKind sampler = SamplerKind::kAuto,
                                             int workers = 0);

/// One row of the empirical-vs-analytic fGn covariance table.
struct LagCovariance {
  std::int64_t lag = 0;
  double empirical = 0.0;
  double stderr_ = 0.0;
  double analytic = 0.0;
  double z = 0.0;
};

/// Per-lag pooled covariance of sampled fGn increments with Monte Carlo
/// z-scores against fgn_covariance. Deterministic for any worker count.
std::vector<LagCovariance> fgn_covariance_table(const GridSpec& grid, HurstIndex h,
                                                SamplerKind kind, std::int64_t paths,
                                                std::uint64_t seed, int workers = 0);

struct ExpMomentResult {
  double estimate = 0.0;      // E exp{M Σ (ΔW² + ΔB^H²)}
  double estimate_se = 0.0;
  double brownian_estimate = 0.0;  // E exp{M Σ ΔW²}
  double brownian_se = 0.0;
  double brownian_closed_form = 0.0;  // (1 - 2Mδ)^(-N/2)
  double bound = 0.0;  // (1 - 2Mδ)^(-N/2) (1 - 2MNδ^2H)^(-1/2)
};

/// Exponential-moment diagnostic. Requires 2Mδ < 1 and 2MNδ^2H < 1
/// (throws BoundInapplicableError otherwise, matching the bound's
/// "for all N large enough" proviso).
ExpMomentResult exp_moment_check(double m_coef, const GridSpec& grid, HurstIndex h,
                                 std::int64_t paths, std::uint64_t base_seed,
                                 SamplerKind sampler = SamplerKind::kAuto, int workers = 0);

/// CSV serialization, header `factor,delta,rmse,stderr`.
void write_error_csv(const ErrorReport& report, std::ostream& out);

/// Flat JSON companion: slope, CI, theoretical rate, seed, model, h,
/// fine_N, paths.
void write_error_metadata(const ErrorReport& report, std::ostream& out);

}  // namespace mixedsde
