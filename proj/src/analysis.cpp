#include "mixedsde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixedsde/errors.hpp"
#include "mixedsde/parallel.hpp"
#include "mixedsde/textio.hpp"

namespace mixedsde {

namespace {

constexpr double kNormal975 = 1.959963984540054;  // z for a 95% interval
constexpr std::int64_t kPathChunk = 8;
constexpr double kMaxAbortFraction = 1e-4;  // 0.01%

const char* sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kAuto: return "auto";
    case SamplerKind::kCholesky: return "cholesky";
    case SamplerKind::kCirculant: return "circulant";
  }
  return "unknown";
}

/// Two-pass mean and standard error over the marked subset, reduced in
/// index order with compensated summation so the result does not depend
/// on how paths were distributed over workers.
MomentEstimate reduce_moment(std::span<const double> values, std::span<const char> skip) {
  NeumaierSum sum;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!skip.empty() && skip[i]) continue;
    sum.add(values[i]);
    ++n;
  }
  if (n == 0) throw NumericalError("no usable paths in Monte Carlo reduction");
  const double mean = sum.value() / static_cast<double>(n);
  NeumaierSum squares;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!skip.empty() && skip[i]) continue;
    const double d = values[i] - mean;
    squares.add(d * d);
  }
  const double variance = n > 1 ? squares.value() / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(variance / static_cast<double>(n))};
}

MomentEstimate reduce_moment(std::span<const double> values) {
  return reduce_moment(values, {});
}

/// Runs `paths` independent simulations, filling per-path statistics
/// through `body(path_index, noise)`. Seeds are derived from
/// (base_seed, path index), so results are worker-count independent.
void for_each_noise_path(const NoiseSampler& sampler, std::int64_t paths, int workers,
                         std::uint64_t base_seed,
                         const std::function<void(std::int64_t, const NoisePath&)>& body) {
  parallel_chunks(paths, workers, kPathChunk, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      const NoisePath noise = sampler.sample(derive_seed(base_seed, static_cast<std::uint64_t>(i)));
      body(i, noise);
    }
  });
}

}  // namespace

void CouplingPlan::validate() const {
  if (fine_steps <= 0) throw PlanError("fine_steps must be positive");
  if (paths <= 0) throw PlanError("paths must be positive");
  if (!(horizon > 0.0)) throw PlanError("horizon must be positive");
  if (std::ssize(factors) < 3) {
    throw PlanError("need at least 3 coarsening factors for a rate fit, got " +
                    std::to_string(factors.size()));
  }
  std::int64_t previous = 0;
  for (const std::int64_t m : factors) {
    if (m < 2) throw PlanError("factor " + std::to_string(m) + " must be >= 2");
    if (fine_steps % m != 0) {
      throw PlanError("factor " + std::to_string(m) + " does not divide fine_n " +
                      std::to_string(fine_steps));
    }
    if (m < 8) {
      throw PlanError("factor " + std::to_string(m) +
                      " leaves the reference grid less than 8x finer than the coarse grid");
    }
    if (m <= previous) throw PlanError("factors must be strictly increasing");
    previous = m;
  }
  if (!model.a || !model.b || !model.c) throw PlanError("plan model has unset coefficients");
}

std::vector<double> aggregate_increments(std::span<const double> fine, std::int64_t factor) {
  if (factor < 1) throw PlanError("aggregation factor must be >= 1");
  if (std::ssize(fine) % factor != 0) {
    throw PlanError("factor " + std::to_string(factor) + " does not divide the increment count " +
                    std::to_string(fine.size()));
  }
  const std::size_t coarse_size = fine.size() / static_cast<std::size_t>(factor);
  std::vector<double> coarse(coarse_size);
  std::size_t j = 0;
  for (std::size_t block = 0; block < coarse_size; ++block) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < factor; ++i) sum += fine[j++];
    coarse[block] = sum;
  }
  return coarse;
}

double theoretical_rate(HurstIndex h) {
  if (!(h.value() > 0.5) || !(h.value() < 1.0)) {
    throw DomainError("theoretical_rate requires 1/2 < h < 1");
  }
  return std::min(0.5, 2.0 * h.value() - 1.0);
}

RateFit fit_rate(std::span<const RatePoint> points) {
  if (points.size() < 3) throw PlanError("rate fit needs at least 3 points");
  bool all_zero_stderr = true;
  for (const auto& p : points) {
    if (!(p.value > 0.0)) {
      throw DegenerateFitError("rate fit given a nonpositive value at delta = " +
                               format_float(p.delta) + "; report exactness instead");
    }
    if (p.stderr_ < 0.0) throw DomainError("negative stderr in rate fit");
    if (p.stderr_ > 0.0) all_zero_stderr = false;
  }

  std::vector<double> x(points.size());
  std::vector<double> y(points.size());
  std::vector<double> w(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    x[i] = std::log(points[i].delta);
    y[i] = std::log(points[i].value);
    if (all_zero_stderr) {
      w[i] = 1.0;
    } else {
      const double rel = points[i].stderr_ / points[i].value;
      if (!(rel > 0.0)) throw DomainError("rate fit mixes zero and nonzero stderr values");
      w[i] = 1.0 / (rel * rel);
    }
  }

  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw NumericalError("rate fit design matrix is singular");

  RateFit fit;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  if (all_zero_stderr) {
    // Residual-based error estimate.
    double rss = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    const double s2 = rss / static_cast<double>(points.size() - 2);
    fit.slope_stderr = std::sqrt(s2 * sw / det);
  } else {
    fit.slope_stderr = std::sqrt(sw / det);
  }
  fit.ci_lo = fit.slope - kNormal975 * fit.slope_stderr;
  fit.ci_hi = fit.slope + kNormal975 * fit.slope_stderr;
  return fit;
}

ErrorReport strong_error(const CouplingPlan& plan) {
  plan.validate();
  const GridSpec fine_grid = GridSpec::make(plan.horizon, plan.fine_steps);
  const NoiseSampler sampler(fine_grid, plan.h, plan.sampler);
  const std::size_t n_factors = plan.factors.size();

  std::vector<GridSpec> coarse_grids;
  coarse_grids.reserve(n_factors);
  for (const std::int64_t m : plan.factors) {
    coarse_grids.push_back(GridSpec::make(plan.horizon, plan.fine_steps / m));
  }

  // Per-path squared errors, stored by path index so the reduction
  // order is fixed regardless of the worker count.
  std::vector<double> squared(static_cast<std::size_t>(plan.paths) * n_factors, 0.0);
  std::vector<char> aborted(static_cast<std::size_t>(plan.paths), 0);

  for_each_noise_path(sampler, plan.paths, plan.workers, plan.base_seed,
                      [&](std::int64_t i, const NoisePath& noise) {
    try {
      const Trajectory fine = euler_path(plan.model, noise);
      const double reference_terminal = fine.values.back();
      for (std::size_t f = 0; f < n_factors; ++f) {
        NoisePath coarse_noise;
        coarse_noise.grid = coarse_grids[f];
        coarse_noise.seed = noise.seed;
        coarse_noise.brownian = aggregate_increments(noise.brownian, plan.factors[f]);
        coarse_noise.fractional = aggregate_increments(noise.fractional, plan.factors[f]);
        const Trajectory coarse = euler_path(plan.model, coarse_noise);
        const double diff = reference_terminal - coarse.values.back();
        squared[static_cast<std::size_t>(i) * n_factors + f] = diff * diff;
      }
    } catch (const NumericalError&) {
      aborted[static_cast<std::size_t>(i)] = 1;
    }
  });

  ErrorReport report;
  report.paths_requested = plan.paths;
  report.paths_aborted = std::count(aborted.begin(), aborted.end(), char{1});
  report.paths_used = plan.paths - report.paths_aborted;
  report.model_name = plan.model.name;
  report.hurst = plan.h.value();
  report.horizon = plan.horizon;
  report.fine_steps = plan.fine_steps;
  report.base_seed = plan.base_seed;
  report.sampler = sampler_name(sampler.active_kind());
  report.theoretical_slope =
      plan.h.degenerate() ? 0.5 : theoretical_rate(plan.h);  // both drivers Brownian at h = 1/2

  if (static_cast<double>(report.paths_aborted) >
      kMaxAbortFraction * static_cast<double>(plan.paths)) {
    throw NumericalError(std::to_string(report.paths_aborted) + " of " +
                         std::to_string(plan.paths) +
                         " paths aborted on non-finite states (> 0.01%); aborting the run");
  }

  std::vector<double> factor_values(static_cast<std::size_t>(plan.paths));
  for (std::size_t f = 0; f < n_factors; ++f) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(plan.paths); ++i) {
      factor_values[i] = squared[i * n_factors + f];
    }
    const MomentEstimate mse = reduce_moment(factor_values, aborted);
    ErrorRecord record;
    record.factor = plan.factors[f];
    record.delta = coarse_grids[f].mesh;
    record.rmse = std::sqrt(mse.estimate);
    // Delta method: se(sqrt(m)) = se(m) / (2 sqrt(m)).
    record.stderr_ = record.rmse > 0.0 ? mse.stderr_ / (2.0 * record.rmse) : 0.0;
    report.records.push_back(record);
  }

  double max_rmse = 0.0;
  for (const auto& r : report.records) max_rmse = std::max(max_rmse, r.rmse);
  if (max_rmse < kExactnessThreshold) {
    report.exact = true;
    return report;
  }

  std::vector<RatePoint> points;
  points.reserve(n_factors);
  for (const auto& r : report.records) points.push_back({r.delta, r.rmse, r.stderr_});
  report.fit = fit_rate(points);
  return report;
}

double stochastic_derivative_product(const Trajectory& trajectory, std::int64_t s_index,
                                     std::int64_t n_index) {
  if (trajectory.model == nullptr || trajectory.noise == nullptr) {
    throw DomainError("trajectory lacks model/noise references");
  }
  const std::int64_t n_steps = trajectory.grid.steps;
  if (s_index < 0 || n_index <= s_index || n_index > n_steps) {
    throw DomainError("stochastic_derivative_product requires 0 <= s_index < n_index <= N");
  }
  const ModelSpec& model = *trajectory.model;
  const NoisePath& noise = *trajectory.noise;
  const double delta = trajectory.grid.mesh;

  // First factor beyond c(·) enters at k0 + 1: one Euler step after
  // ν_{k0} the derivative is exactly c(X_{ν_k0}), and each further step
  // multiplies by (1 + a_x δ + b_x ΔW + c' ΔB^H).
  double product = model.c(trajectory.values[static_cast<std::size_t>(s_index)]);
  for (std::int64_t k = s_index + 1; k < n_index; ++k) {
    const double t = trajectory.grid.node(k);
    const double x = trajectory.values[static_cast<std::size_t>(k)];
    product *= 1.0 + model.a_x(t, x) * delta +
               model.b_x(t, x) * noise.brownian[static_cast<std::size_t>(k)] +
               model.c_x(x) * noise.fractional[static_cast<std::size_t>(k)];
  }
  return product;
}

MomentEstimate derivative_moment_check(const ModelSpec& model, HurstIndex h,
                                       const GridSpec& grid, int p, std::int64_t paths,
                                       std::uint64_t base_seed, SamplerKind sampler_kind,
                                       int workers) {
  if (p != 2 && p != 4) throw DomainError("derivative_moment_check supports p in {2, 4}");
  if (grid.steps < 2) throw DomainError("derivative moment needs at least 2 steps");
  const NoiseSampler sampler(grid, h, sampler_kind);
  const std::int64_t mid = grid.steps / 2;
  std::vector<double> values(static_cast<std::size_t>(paths));
  for_each_noise_path(sampler, paths, workers, base_seed,
                      [&](std::int64_t i, const NoisePath& noise) {
    const Trajectory trajectory = euler_path(model, noise);
    const double d = stochastic_derivative_product(trajectory, mid, grid.steps);
    values[static_cast<std::size_t>(i)] = std::pow(std::abs(d), p);
  });
  return reduce_moment(values);
}

MomentEstimate terminal_moment_check(const ModelSpec& model, HurstIndex h,
                                     const GridSpec& grid, int p, std::int64_t paths,
                                     std::uint64_t base_seed, SamplerKind sampler_kind,
                                     int workers) {
  if (p <= 0) throw DomainError("moment order must be positive");
  const NoiseSampler sampler(grid, h, sampler_kind);
  std::vector<double> values(static_cast<std::size_t>(paths));
  for_each_noise_path(sampler, paths, workers, base_seed,
                      [&](std::int64_t i, const NoisePath& noise) {
    const Trajectory trajectory = euler_path(model, noise);
    values[static_cast<std::size_t>(i)] = std::pow(trajectory.values.back(), p);
  });
  return reduce_moment(values);
}

std::vector<RatePoint> grid_continuity_sweep(const ModelSpec& model, HurstIndex h,
                                             std::span<const std::int64_t> step_counts,
                                             double horizon, std::int64_t paths,
                                             std::uint64_t base_seed, SamplerKind sampler_kind,
                                             int workers) {
  std::vector<RatePoint> points;
  points.reserve(step_counts.size());
  for (const std::int64_t n : step_counts) {
    const GridSpec coarse = GridSpec::make(horizon, n);
    const GridSpec fine = GridSpec::make(horizon, 2 * n);
    const NoiseSampler sampler(fine, h, sampler_kind);
    std::vector<double> values(static_cast<std::size_t>(paths));
    for_each_noise_path(sampler, paths, workers, base_seed ^ static_cast<std::uint64_t>(n),
                        [&](std::int64_t i, const NoisePath& fine_noise) {
      NoisePath coarse_noise;
      coarse_noise.grid = coarse;
      coarse_noise.seed = fine_noise.seed;
      coarse_noise.brownian = aggregate_increments(fine_noise.brownian, 2);
      coarse_noise.fractional = aggregate_increments(fine_noise.fractional, 2);
      const Trajectory trajectory = euler_path(model, coarse_noise);
      // In-cell displacement at each midpoint; pooled over the cells.
      double acc = 0.0;
      for (std::int64_t k = 0; k < n; ++k) {
        const double t = coarse.node(k);
        const double x = trajectory.values[static_cast<std::size_t>(k)];
        const double displacement =
            model.a(t, x) * 0.5 * coarse.mesh +
            model.b(t, x) * fine_noise.brownian[static_cast<std::size_t>(2 * k)] +
            model.c(x) * fine_noise.fractional[static_cast<std::size_t>(2 * k)];
        acc += displacement * displacement;
      }
      values[static_cast<std::size_t>(i)] = acc / static_cast<double>(n);
    });
    const MomentEstimate estimate = reduce_moment(values);
    points.push_back({coarse.mesh, estimate.estimate, estimate.stderr_});
  }
  std::sort(points.begin(), points.end(),
            [](const RatePoint& a, const RatePoint& b) { return a.delta < b.delta; });
  return points;
}

std::vector<LagCovariance> fgn_covariance_table(const GridSpec& grid, HurstIndex h,
                                                SamplerKind kind, std::int64_t paths,
                                                std::uint64_t seed, int workers) {
  const std::size_t n = static_cast<std::size_t>(grid.steps);
  const std::int64_t chunk = 64;
  const std::int64_t chunk_count = (paths + chunk - 1) / chunk;
  std::vector<double> chunk_sum(static_cast<std::size_t>(chunk_count) * n, 0.0);
  std::vector<double> chunk_sum_sq(static_cast<std::size_t>(chunk_count) * n, 0.0);

  const NoiseSampler sampler(grid, h, kind);
  parallel_chunks(paths, workers, chunk, [&](std::int64_t begin, std::int64_t end) {
    const std::size_t chunk_index = static_cast<std::size_t>(begin / chunk);
    double* sums = &chunk_sum[chunk_index * n];
    double* squares = &chunk_sum_sq[chunk_index * n];
    for (std::int64_t i = begin; i < end; ++i) {
      const NoisePath path = sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(i)));
      for (std::size_t lag = 0; lag < n; ++lag) {
        double acc = 0.0;
        for (std::size_t j = 0; j + lag < n; ++j) {
          acc += path.fractional[j] * path.fractional[j + lag];
        }
        const double pooled = acc / static_cast<double>(n - lag);
        sums[lag] += pooled;
        squares[lag] += pooled * pooled;
      }
    }
  });

  std::vector<LagCovariance> table(n);
  const double count = static_cast<double>(paths);
  for (std::size_t lag = 0; lag < n; ++lag) {
    NeumaierSum sum;
    NeumaierSum sum_sq;
    for (std::size_t c = 0; c < static_cast<std::size_t>(chunk_count); ++c) {
      sum.add(chunk_sum[c * n + lag]);
      sum_sq.add(chunk_sum_sq[c * n + lag]);
    }
    LagCovariance& row = table[lag];
    row.lag = static_cast<std::int64_t>(lag);
    row.empirical = sum.value() / count;
    const double variance =
        (sum_sq.value() - count * row.empirical * row.empirical) / (count - 1.0);
    row.stderr_ = std::sqrt(std::max(variance, 0.0) / count);
    row.analytic = fgn_covariance(row.lag, h, grid.mesh);
    row.z = (row.empirical - row.analytic) / row.stderr_;
  }
  return table;
}

ExpMomentResult exp_moment_check(double m_coef, const GridSpec& grid, HurstIndex h,
                                 std::int64_t paths, std::uint64_t base_seed,
                                 SamplerKind sampler_kind, int workers) {
  if (!(m_coef > 0.0)) throw DomainError("exp_moment_check requires M > 0");
  const double delta = grid.mesh;
  const double n = static_cast<double>(grid.steps);
  const double brownian_arg = 2.0 * m_coef * delta;
  const double fractional_arg = 2.0 * m_coef * n * std::pow(delta, 2.0 * h.value());
  if (!(brownian_arg < 1.0) || !(fractional_arg < 1.0)) {
    throw BoundInapplicableError(
        "exponential-moment bound needs 2Mδ < 1 and 2MNδ^2H < 1; increase N");
  }

  const NoiseSampler sampler(grid, h, sampler_kind);
  std::vector<double> mixed(static_cast<std::size_t>(paths));
  std::vector<double> brownian_only(static_cast<std::size_t>(paths));
  for_each_noise_path(sampler, paths, workers, base_seed,
                      [&](std::int64_t i, const NoisePath& noise) {
    double sum_w = 0.0;
    double sum_b = 0.0;
    for (std::size_t k = 0; k < noise.brownian.size(); ++k) {
      sum_w += noise.brownian[k] * noise.brownian[k];
      sum_b += noise.fractional[k] * noise.fractional[k];
    }
    mixed[static_cast<std::size_t>(i)] = std::exp(m_coef * (sum_w + sum_b));
    brownian_only[static_cast<std::size_t>(i)] = std::exp(m_coef * sum_w);
  });

  ExpMomentResult result;
  const MomentEstimate mixed_estimate = reduce_moment(mixed);
  const MomentEstimate brownian_estimate = reduce_moment(brownian_only);
  result.estimate = mixed_estimate.estimate;
  result.estimate_se = mixed_estimate.stderr_;
  result.brownian_estimate = brownian_estimate.estimate;
  result.brownian_se = brownian_estimate.stderr_;
  result.brownian_closed_form = std::pow(1.0 - brownian_arg, -n / 2.0);
  result.bound = result.brownian_closed_form / std::sqrt(1.0 - fractional_arg);
  return result;
}

void write_error_csv(const ErrorReport& report, std::ostream& out) {
  out << "factor,delta,rmse,stderr\n";
  for (const auto& r : report.records) {
    out << r.factor << ',' << format_float(r.delta) << ',' << format_float(r.rmse) << ','
        << format_float(r.stderr_) << '\n';
  }
}

void write_error_metadata(const ErrorReport& report, std::ostream& out) {
  out << "{\n";
  out << "  \"model\": \"" << report.model_name << "\",\n";
  out << "  \"hurst\": " << format_float(report.hurst) << ",\n";
  out << "  \"horizon\": " << format_float(report.horizon) << ",\n";
  out << "  \"fine_n\": " << report.fine_steps << ",\n";
  out << "  \"paths\": " << report.paths_requested << ",\n";
  out << "  \"paths_used\": " << report.paths_used << ",\n";
  out << "  \"paths_aborted\": " << report.paths_aborted << ",\n";
  out << "  \"seed\": " << report.base_seed << ",\n";
  out << "  \"sampler\": \"" << report.sampler << "\",\n";
  out << "  \"exact\": " << (report.exact ? "true" : "false") << ",\n";
  out << "  \"theoretical_slope\": " << format_float(report.theoretical_slope) << ",\n";
  if (report.fit) {
    out << "  \"slope\": " << format_float(report.fit->slope) << ",\n";
    out << "  \"slope_stderr\": " << format_float(report.fit->slope_stderr) << ",\n";
    out << "  \"ci_lo\": " << format_float(report.fit->ci_lo) << ",\n";
    out << "  \"ci_hi\": " << format_float(report.fit->ci_hi) << ",\n";
    out << "  \"intercept\": " << format_float(report.fit->intercept) << "\n";
  } else {
    out << "  \"slope\": null\n";
  }
  out << "}\n";
}

}  // namespace mixedsde
