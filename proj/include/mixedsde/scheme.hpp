#pragma once

#include <cstdint>
#include <memory>
#include <ostream>

#include "mixedsde/model.hpp"
#include "mixedsde/noise.hpp"

namespace mixedsde {

/// Euler approximation values at the grid nodes. Holds non-owning
/// references to the model and the driving noise; both must outlive the
/// trajectory (the simulation harnesses keep them in scope).
struct Trajectory {
  GridSpec grid;
  std::vector<double> values;  // N+1 entries, values[0] == model->x0
  const ModelSpec* model = nullptr;
  const NoisePath* noise = nullptr;
};

/// One Euler update: x + a(t,x) δ + b(t,x) ΔW + c(x) ΔB^H.
/// Throws NumericalError if the result is non-finite.
double euler_step(const ModelSpec& model, double t, double x, double delta,
                  double brownian_increment, double fractional_increment);

/// Runs the recursion over the whole grid; deterministic in (model, noise).
Trajectory euler_path(const ModelSpec& model, const NoisePath& noise);

/// Value at a grid node; throws UnsupportedPointError off the nodes
/// (between nodes the interpolation needs bridge noise, see below).
double interpolate(const Trajectory& trajectory, double u);

/// Continuous interpolation at u using bridge increments reconstructed
/// from a refinement of the trajectory's grid: fine_noise must live on
/// a grid that subdivides trajectory.grid and contain u as a node.
double interpolate(const Trajectory& trajectory, double u, const NoisePath& fine_noise);

/// (x0 + 1) e^{K δ n}: the discrete Gronwall majorant for sequences
/// with x_{k+1} <= x_k (1 + Kδ) + Kδ.
double discrete_gronwall_bound(double x0, double k, double delta, std::int64_t n);

/// State transform ψ(x) = ∫_0^x c(z)^{-1} dz and the coefficients of
/// the transformed equation dY = α dt + β dW + dB^H. ψ is evaluated by
/// adaptive quadrature (tolerance 1e-10) with a memo cache keyed on x;
/// ψ^{-1} by safeguarded Newton iteration.
class TransformedModel {
 public:
  explicit TransformedModel(const ModelSpec& base);

  double psi(double x) const;
  double psi_inv(double y) const;
  double alpha(double t, double x) const;  // a/c - b² c' / (2 c²)
  double beta(double t, double x) const;   // b/c

  /// The transformed equation as a runnable model (c ≡ 1, drift and
  /// diffusion composed with ψ^{-1}); shares this transform's cache.
  ModelSpec as_model() const;

  const ModelSpec& base() const noexcept { return base_; }

 private:
  ModelSpec base_;
  struct PsiCache;
  std::shared_ptr<PsiCache> cache_;
};

TransformedModel lamperti_transform(const ModelSpec& model);

/// CSV dump, header `k,t,x`, 17-significant-digit values.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace mixedsde
