#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mixedsde/fft.hpp"
#include "mixedsde/rng.hpp"

namespace mixedsde {

/// Hurst index of the fractional driver. The model requires 1/2 < H < 1;
/// H = 1/2 is admitted only through the explicit degenerate-Brownian
/// factory, used by tests that compare against plain white noise.
class HurstIndex {
 public:
  static HurstIndex checked(double h);
  static HurstIndex degenerate_brownian() noexcept { return HurstIndex(0.5); }

  double value() const noexcept { return h_; }
  bool degenerate() const noexcept { return h_ == 0.5; }

 private:
  explicit HurstIndex(double h) noexcept : h_(h) {}
  double h_;
};

/// Uniform partition of [0, T] into N steps of mesh T/N.
struct GridSpec {
  double horizon = 0.0;
  std::int64_t steps = 0;
  double mesh = 0.0;

  static GridSpec make(double horizon, std::int64_t steps);

  double node(std::int64_t k) const noexcept {
    return static_cast<double>(k) * mesh;
  }
};

/// One realization of the driving increments on a grid. The Brownian
/// and fractional streams are generated from disjoint sub-streams of
/// the seed, so they are independent by construction.
struct NoisePath {
  GridSpec grid;
  std::vector<double> brownian;    // ΔW_k
  std::vector<double> fractional;  // ΔB^H_k
  std::uint64_t seed = 0;
};

/// Covariance of fractional Brownian motion, (t^2H + s^2H - |t-s|^2H)/2.
double fbm_covariance(double t, double s, HurstIndex h);

/// Stationary covariance of fGn increments at mesh delta:
/// γ(k) = δ^2H ((k+1)^2H - 2 k^2H + |k-1|^2H) / 2.
double fgn_covariance(std::int64_t lag, HurstIndex h, double delta);

/// ψ(t,s) = H(2H-1)|t-s|^(2H-2); diverges on the diagonal.
double singular_kernel(double t, double s, HurstIndex h);

/// Fills out with N i.i.d. centered Gaussians of variance mesh.
void sample_brownian(const GridSpec& grid, GaussianSource& normals,
                     std::span<double> out);
std::vector<double> sample_brownian(const GridSpec& grid, GaussianSource& normals);

/// Exact fGn sampler via dense lower-triangular factorization of the
/// covariance matrix; O(N^3) setup, O(N^2) per path, guarded to small N.
class FgnCholeskySampler {
 public:
  static constexpr std::int64_t kMaxSteps = 4096;

  FgnCholeskySampler(const GridSpec& grid, HurstIndex h);

  void sample(GaussianSource& normals, std::span<double> out) const;
  std::vector<double> sample(GaussianSource& normals) const;

  const GridSpec& grid() const noexcept { return grid_; }

 private:
  GridSpec grid_;
  HurstIndex h_;
  std::vector<double> factor_;  // packed row-major lower triangle
};

/// Exact fGn sampler via circulant embedding of the covariance and an
/// FFT (Davies-Harte); O(N log N) per path, any N.
class FgnCirculantSampler {
 public:
  FgnCirculantSampler(const GridSpec& grid, HurstIndex h);

  void sample(GaussianSource& normals, std::span<double> out) const;
  std::vector<double> sample(GaussianSource& normals) const;

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t embedding_size() const noexcept { return fft_.size(); }
  /// Most negative raw eigenvalue of the embedding (before clamping).
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  GridSpec grid_;
  HurstIndex h_;
  Radix2Fft fft_;
  std::vector<double> frequency_scale_;  // premultipliers for normal draws
  double min_eigenvalue_ = 0.0;
};

enum class SamplerKind { kAuto, kCholesky, kCirculant };

/// Resolution of kAuto: factorization up to kMaxSteps, FFT above.
SamplerKind resolve_sampler(SamplerKind kind, std::int64_t steps);

/// Joint sampler for one NoisePath: Brownian increments from one
/// sub-stream, fGn increments from another. Immutable after
/// construction; sample() is safe to call concurrently.
class NoiseSampler {
 public:
  NoiseSampler(const GridSpec& grid, HurstIndex h,
               SamplerKind kind = SamplerKind::kAuto);

  NoisePath sample(std::uint64_t seed) const;

  SamplerKind active_kind() const noexcept { return kind_; }
  const GridSpec& grid() const noexcept { return grid_; }
  HurstIndex hurst() const noexcept { return h_; }

 private:
  GridSpec grid_;
  HurstIndex h_;
  SamplerKind kind_;
  std::optional<FgnCholeskySampler> cholesky_;
  std::optional<FgnCirculantSampler> circulant_;
};

/// One-off convenience wrapper around NoiseSampler.
NoisePath sample_noise_path(const GridSpec& grid, HurstIndex h,
                            std::uint64_t seed,
                            SamplerKind kind = SamplerKind::kAuto);

/// CSV dump, header `k,dW,dBH`, 17-significant-digit values.
void write_noise_csv(const NoisePath& path, std::ostream& out);

}  // namespace mixedsde
