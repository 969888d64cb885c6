#include "mixedsde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "mixedsde/errors.hpp"
#include "mixedsde/textio.hpp"

namespace mixedsde {

namespace {

constexpr double kEigenvalueClampTolerance = 1e-10;  // relative to the largest

std::size_t next_power_of_two(std::int64_t n) {
  std::size_t p = 1;
  while (p < static_cast<std::size_t>(n)) p <<= 1;
  return p;
}

}  // namespace

HurstIndex HurstIndex::checked(double h) {
  if (!(h > 0.5) || !(h < 1.0)) {
    throw DomainError("Hurst index must lie in (1/2, 1), got " + format_float(h));
  }
  return HurstIndex(h);
}

GridSpec GridSpec::make(double horizon, std::int64_t steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("grid horizon must be positive and finite");
  }
  if (steps <= 0) throw DomainError("grid step count must be positive");
  GridSpec grid;
  grid.horizon = horizon;
  grid.steps = steps;
  grid.mesh = horizon / static_cast<double>(steps);
  const double recomposed = grid.mesh * static_cast<double>(steps);
  const double ulp = std::nextafter(horizon, std::numeric_limits<double>::infinity()) - horizon;
  if (std::abs(recomposed - horizon) > ulp) {
    throw DomainError("mesh * steps does not reproduce the horizon to one ulp; "
                      "choose a step count that divides the horizon exactly");
  }
  return grid;
}

double fbm_covariance(double t, double s, HurstIndex h) {
  if (t < 0.0 || s < 0.0) throw DomainError("fbm_covariance requires nonnegative times");
  const double two_h = 2.0 * h.value();
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_covariance(std::int64_t lag, HurstIndex h, double delta) {
  if (lag < 0) throw DomainError("fgn_covariance requires a nonnegative lag");
  if (!(delta > 0.0)) throw DomainError("fgn_covariance requires a positive mesh");
  const double two_h = 2.0 * h.value();
  const double k = static_cast<double>(lag);
  const double second_difference =
      std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(std::abs(k - 1.0), two_h);
  return 0.5 * std::pow(delta, two_h) * second_difference;
}

double singular_kernel(double t, double s, HurstIndex h) {
  if (t == s) throw SingularityError("singular_kernel diverges on the diagonal t == s");
  const double hv = h.value();
  return hv * (2.0 * hv - 1.0) * std::pow(std::abs(t - s), 2.0 * hv - 2.0);
}

void sample_brownian(const GridSpec& grid, GaussianSource& normals, std::span<double> out) {
  if (std::ssize(out) != grid.steps) throw DomainError("sample_brownian output size mismatch");
  const double scale = std::sqrt(grid.mesh);
  for (auto& v : out) v = scale * normals();
}

std::vector<double> sample_brownian(const GridSpec& grid, GaussianSource& normals) {
  std::vector<double> out(static_cast<std::size_t>(grid.steps));
  sample_brownian(grid, normals, out);
  return out;
}

FgnCholeskySampler::FgnCholeskySampler(const GridSpec& grid, HurstIndex h)
    : grid_(grid), h_(h) {
  const std::int64_t n = grid.steps;
  if (n > kMaxSteps) {
    throw PlanError("Cholesky fGn sampler is guarded to N <= " +
                    std::to_string(kMaxSteps) + ", got N = " + std::to_string(n));
  }
  // In-place factorization of the Toeplitz covariance, packed rows.
  const std::size_t un = static_cast<std::size_t>(n);
  factor_.assign(un * (un + 1) / 2, 0.0);
  auto at = [this](std::size_t i, std::size_t j) -> double& {
    return factor_[i * (i + 1) / 2 + j];
  };
  for (std::size_t i = 0; i < un; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = fgn_covariance(static_cast<std::int64_t>(i - j), h_, grid_.mesh);
      for (std::size_t k = 0; k < j; ++k) sum -= at(i, k) * at(j, k);
      if (i == j) {
        if (!(sum > 0.0)) {
          throw NumericalError("fGn covariance factorization lost positive definiteness at pivot " +
                               std::to_string(i));
        }
        at(i, j) = std::sqrt(sum);
      } else {
        at(i, j) = sum / at(j, j);
      }
    }
  }
}

void FgnCholeskySampler::sample(GaussianSource& normals, std::span<double> out) const {
  const std::size_t n = static_cast<std::size_t>(grid_.steps);
  if (out.size() != n) throw DomainError("fGn sampler output size mismatch");
  std::vector<double> z(n);
  for (auto& v : z) v = normals();
  for (std::size_t i = n; i-- > 0;) {
    const double* row = &factor_[i * (i + 1) / 2];
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
    out[i] = acc;
  }
}

std::vector<double> FgnCholeskySampler::sample(GaussianSource& normals) const {
  std::vector<double> out(static_cast<std::size_t>(grid_.steps));
  sample(normals, out);
  return out;
}

FgnCirculantSampler::FgnCirculantSampler(const GridSpec& grid, HurstIndex h)
    : grid_(grid), h_(h), fft_(2 * next_power_of_two(grid.steps)) {
  const std::size_t embedding = fft_.size();
  const std::size_t half = embedding / 2;

  // First row of the circulant extension of the covariance.
  std::vector<std::complex<double>> row(embedding);
  for (std::size_t j = 0; j < embedding; ++j) {
    const std::size_t lag = std::min(j, embedding - j);
    row[j] = fgn_covariance(static_cast<std::int64_t>(lag), h_, grid_.mesh);
  }
  fft_.forward(row);

  double max_eig = 0.0;
  min_eigenvalue_ = std::numeric_limits<double>::infinity();
  for (const auto& v : row) {
    max_eig = std::max(max_eig, v.real());
    min_eigenvalue_ = std::min(min_eigenvalue_, v.real());
  }
  const double clamp_floor = -kEigenvalueClampTolerance * max_eig;
  if (min_eigenvalue_ < clamp_floor) {
    throw NumericalError("circulant embedding produced a materially negative eigenvalue (" +
                         format_float(min_eigenvalue_) +
                         "); fGn embeddings are nonnegative, so this indicates a bug");
  }

  // Premultipliers: draws at bins 0 and half are real with variance
  // λ/L, interior bins are complex with variance λ/(2L) per component.
  frequency_scale_.resize(embedding);
  const double inv_l = 1.0 / static_cast<double>(embedding);
  for (std::size_t j = 0; j < embedding; ++j) {
    const double eig = std::max(row[j].real(), 0.0);
    const double variance = (j == 0 || j == half) ? eig * inv_l : 0.5 * eig * inv_l;
    frequency_scale_[j] = std::sqrt(variance);
  }
}

void FgnCirculantSampler::sample(GaussianSource& normals, std::span<double> out) const {
  const std::size_t n = static_cast<std::size_t>(grid_.steps);
  if (out.size() != n) throw DomainError("fGn sampler output size mismatch");
  const std::size_t embedding = fft_.size();
  const std::size_t half = embedding / 2;

  std::vector<std::complex<double>> freq(embedding);
  freq[0] = frequency_scale_[0] * normals();
  for (std::size_t j = 1; j < half; ++j) {
    const double re = normals();
    const double im = normals();
    freq[j] = frequency_scale_[j] * std::complex<double>(re, im);
    freq[embedding - j] = std::conj(freq[j]);
  }
  freq[half] = frequency_scale_[half] * normals();

  fft_.forward(freq);
  for (std::size_t k = 0; k < n; ++k) out[k] = freq[k].real();
}

std::vector<double> FgnCirculantSampler::sample(GaussianSource& normals) const {
  std::vector<double> out(static_cast<std::size_t>(grid_.steps));
  sample(normals, out);
  return out;
}

SamplerKind resolve_sampler(SamplerKind kind, std::int64_t steps) {
  if (kind != SamplerKind::kAuto) return kind;
  return steps <= FgnCholeskySampler::kMaxSteps ? SamplerKind::kCholesky
                                                : SamplerKind::kCirculant;
}

NoiseSampler::NoiseSampler(const GridSpec& grid, HurstIndex h, SamplerKind kind)
    : grid_(grid), h_(h), kind_(resolve_sampler(kind, grid.steps)) {
  if (kind_ == SamplerKind::kCholesky) {
    cholesky_.emplace(grid_, h_);
  } else {
    circulant_.emplace(grid_, h_);
  }
}

NoisePath NoiseSampler::sample(std::uint64_t seed) const {
  NoisePath path;
  path.grid = grid_;
  path.seed = seed;
  path.brownian.resize(static_cast<std::size_t>(grid_.steps));
  path.fractional.resize(static_cast<std::size_t>(grid_.steps));

  GaussianSource brownian_normals(derive_seed(seed, kBrownianStreamSalt));
  GaussianSource fractional_normals(derive_seed(seed, kFractionalStreamSalt));

  sample_brownian(grid_, brownian_normals, path.brownian);
  if (cholesky_) {
    cholesky_->sample(fractional_normals, path.fractional);
  } else {
    circulant_->sample(fractional_normals, path.fractional);
  }
  return path;
}

NoisePath sample_noise_path(const GridSpec& grid, HurstIndex h, std::uint64_t seed,
                            SamplerKind kind) {
  return NoiseSampler(grid, h, kind).sample(seed);
}

void write_noise_csv(const NoisePath& path, std::ostream& out) {
  out << "k,dW,dBH\n";
  for (std::size_t k = 0; k < path.brownian.size(); ++k) {
    out << k << ',' << format_float(path.brownian[k]) << ','
        << format_float(path.fractional[k]) << '\n';
  }
}

}  // namespace mixedsde
