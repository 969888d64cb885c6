#include "mixedsde/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "mixedsde/errors.hpp"
#include "mixedsde/textio.hpp"

namespace mixedsde {

namespace {

constexpr double kQuadratureTolerance = 1e-10;
constexpr int kQuadratureMaxDepth = 48;
constexpr double kInverseTolerance = 1e-12;

double simpson(double lo, double hi, double f_lo, double f_mid, double f_hi) {
  return (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
}

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double f_lo, double f_mid, double f_hi, double whole,
                        double tolerance, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lm = 0.5 * (lo + mid);
  const double rm = 0.5 * (mid + hi);
  const double f_lm = f(lm);
  const double f_rm = f(rm);
  const double left = simpson(lo, mid, f_lo, f_lm, f_mid);
  const double right = simpson(mid, hi, f_mid, f_rm, f_hi);
  const double refined = left + right;
  if (depth >= kQuadratureMaxDepth) {
    throw NumericalError("adaptive quadrature did not converge");
  }
  if (std::abs(refined - whole) <= 15.0 * tolerance) {
    return refined + (refined - whole) / 15.0;
  }
  return adaptive_simpson(f, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * tolerance, depth + 1) +
         adaptive_simpson(f, mid, hi, f_mid, f_rm, f_hi, right, 0.5 * tolerance, depth + 1);
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tolerance) {
  if (lo == hi) return 0.0;
  const double mid = 0.5 * (lo + hi);
  const double f_lo = f(lo);
  const double f_mid = f(mid);
  const double f_hi = f(hi);
  const double whole = simpson(lo, hi, f_lo, f_mid, f_hi);
  return adaptive_simpson(f, lo, hi, f_lo, f_mid, f_hi, whole, tolerance, 0);
}

/// Index of the last node <= u, i.e. n^δ_u, robust to rounding at nodes.
std::int64_t floor_node_index(const GridSpec& grid, double u) {
  std::int64_t k = static_cast<std::int64_t>(std::floor(u / grid.mesh));
  // Snap to a node if u is within a few ulps of it.
  const double tolerance = 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(grid.horizon));
  if (std::abs(grid.node(k + 1) - u) <= tolerance) ++k;
  return std::clamp<std::int64_t>(k, 0, grid.steps);
}

bool is_node(const GridSpec& grid, double u, std::int64_t* index) {
  const double tolerance = 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(grid.horizon));
  const std::int64_t k = floor_node_index(grid, u);
  if (std::abs(grid.node(k) - u) <= tolerance) {
    *index = k;
    return true;
  }
  return false;
}

}  // namespace

double euler_step(const ModelSpec& model, double t, double x, double delta,
                  double brownian_increment, double fractional_increment) {
  if (!(delta > 0.0)) throw DomainError("euler_step requires a positive mesh");
  const double next = x + model.a(t, x) * delta + model.b(t, x) * brownian_increment +
                      model.c(x) * fractional_increment;
  if (!std::isfinite(next)) {
    throw NumericalError("euler step produced a non-finite state at (t=" + format_float(t) +
                         ", x=" + format_float(x) + ")");
  }
  return next;
}

Trajectory euler_path(const ModelSpec& model, const NoisePath& noise) {
  const GridSpec& grid = noise.grid;
  if (std::ssize(noise.brownian) != grid.steps || std::ssize(noise.fractional) != grid.steps) {
    throw DomainError("noise path increment arrays do not match the grid");
  }
  Trajectory trajectory;
  trajectory.grid = grid;
  trajectory.model = &model;
  trajectory.noise = &noise;
  trajectory.values.resize(static_cast<std::size_t>(grid.steps) + 1);
  trajectory.values[0] = model.x0;
  double x = model.x0;
  for (std::int64_t k = 0; k < grid.steps; ++k) {
    try {
      x = euler_step(model, grid.node(k), x, grid.mesh,
                     noise.brownian[static_cast<std::size_t>(k)],
                     noise.fractional[static_cast<std::size_t>(k)]);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " [step " + std::to_string(k) + "]");
    }
    trajectory.values[static_cast<std::size_t>(k + 1)] = x;
  }
  return trajectory;
}

double interpolate(const Trajectory& trajectory, double u) {
  if (u < 0.0 || u > trajectory.grid.horizon) {
    throw DomainError("interpolation point outside [0, T]");
  }
  std::int64_t k = 0;
  if (is_node(trajectory.grid, u, &k)) {
    return trajectory.values[static_cast<std::size_t>(k)];
  }
  throw UnsupportedPointError(
      "interpolation between nodes needs bridge noise; pass a refined NoisePath");
}

double interpolate(const Trajectory& trajectory, double u, const NoisePath& fine_noise) {
  if (u < 0.0 || u > trajectory.grid.horizon) {
    throw DomainError("interpolation point outside [0, T]");
  }
  std::int64_t node_index = 0;
  if (is_node(trajectory.grid, u, &node_index)) {
    return trajectory.values[static_cast<std::size_t>(node_index)];
  }
  const GridSpec& coarse = trajectory.grid;
  const GridSpec& fine = fine_noise.grid;
  if (fine.horizon != coarse.horizon || fine.steps % coarse.steps != 0) {
    throw UnsupportedPointError("fine noise grid does not refine the trajectory grid");
  }
  std::int64_t fine_index = 0;
  if (!is_node(fine, u, &fine_index)) {
    throw UnsupportedPointError("interpolation point is not a node of the refined noise grid");
  }

  const std::int64_t refinement = fine.steps / coarse.steps;
  const std::int64_t base = floor_node_index(coarse, u);
  const double t_base = coarse.node(base);
  const double x_base = trajectory.values[static_cast<std::size_t>(base)];

  // Bridge increments W_{u, t^δ_u}, B^H_{u, t^δ_u} from the refinement.
  double brownian_bridge = 0.0;
  double fractional_bridge = 0.0;
  for (std::int64_t j = base * refinement; j < fine_index; ++j) {
    brownian_bridge += fine_noise.brownian[static_cast<std::size_t>(j)];
    fractional_bridge += fine_noise.fractional[static_cast<std::size_t>(j)];
  }

  const ModelSpec& model = *trajectory.model;
  return x_base + model.a(t_base, x_base) * (u - t_base) +
         model.b(t_base, x_base) * brownian_bridge + model.c(x_base) * fractional_bridge;
}

double discrete_gronwall_bound(double x0, double k, double delta, std::int64_t n) {
  if (x0 < 0.0) throw DomainError("discrete_gronwall_bound requires x0 >= 0");
  if (!(k > 0.0) || !(delta > 0.0)) throw DomainError("discrete_gronwall_bound requires K, delta > 0");
  if (n < 0) throw DomainError("discrete_gronwall_bound requires n >= 0");
  return (x0 + 1.0) * std::exp(k * delta * static_cast<double>(n));
}

struct TransformedModel::PsiCache {
  std::mutex mutex;
  std::map<double, double> values;
};

TransformedModel::TransformedModel(const ModelSpec& base)
    : base_(base), cache_(std::make_shared<PsiCache>()) {
  if (!base_.c || !base_.c_x) {
    throw DomainError("lamperti transform requires c and c_x");
  }
  const double c0 = base_.c(base_.x0);
  if (!(c0 > 0.0)) {
    throw DomainError("lamperti transform requires a positive diffusion c; "
                      "model fails hypothesis (C) at its initial state");
  }
}

double TransformedModel::psi(double x) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->values.find(x);
    if (it != cache_->values.end()) return it->second;
  }
  const auto integrand = [this](double z) {
    const double c = base_.c(z);
    if (!(c > 0.0)) {
      throw NumericalError("c(z) <= 0 inside the transform integral at z = " + format_float(z));
    }
    return 1.0 / c;
  };
  const double value = x >= 0.0 ? integrate(integrand, 0.0, x, kQuadratureTolerance)
                                : -integrate(integrand, x, 0.0, kQuadratureTolerance);
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    cache_->values.emplace(x, value);
  }
  return value;
}

double TransformedModel::psi_inv(double y) const {
  // psi is strictly increasing with slope 1/c in [1/K-ish, K-ish]; expand
  // a bracket around 0 and polish with Newton, bisecting when Newton
  // leaves the bracket.
  double lo = 0.0;
  double hi = 0.0;
  double step = std::max(1.0, std::abs(y));
  if (y >= 0.0) {
    hi = step;
    while (psi(hi) < y) {
      lo = hi;
      hi += step;
      step *= 2.0;
      if (!(hi < 1e12)) throw NumericalError("psi_inv bracket expansion diverged");
    }
  } else {
    lo = -step;
    while (psi(lo) > y) {
      hi = lo;
      lo -= step;
      step *= 2.0;
      if (!(lo > -1e12)) throw NumericalError("psi_inv bracket expansion diverged");
    }
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double value = psi(x) - y;
    if (std::abs(value) <= kInverseTolerance) return x;
    if (value > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double derivative = 1.0 / base_.c(x);
    double next = x - value / derivative;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  throw NumericalError("psi_inv did not converge");
}

double TransformedModel::alpha(double t, double x) const {
  const double c = base_.c(x);
  const double b = base_.b(t, x);
  return base_.a(t, x) / c - b * b * base_.c_x(x) / (2.0 * c * c);
}

double TransformedModel::beta(double t, double x) const {
  return base_.b(t, x) / base_.c(x);
}

ModelSpec TransformedModel::as_model() const {
  TransformedModel self = *this;  // shares base_ functions and cache_
  ModelSpec m;
  m.name = base_.name + "-lamperti";
  m.a = [self](double t, double y) { return self.alpha(t, self.psi_inv(y)); };
  m.b = [self](double t, double y) { return self.beta(t, self.psi_inv(y)); };
  m.c = [](double) { return 1.0; };
  // State derivatives by central differences; the transformed equation
  // is used for cross-checks, not hypothesis probing.
  const double eps = 1e-6;
  m.a_x = [self, eps](double t, double y) {
    const double xp = self.psi_inv(y + eps);
    const double xm = self.psi_inv(y - eps);
    return (self.alpha(t, xp) - self.alpha(t, xm)) / (2.0 * eps);
  };
  m.b_x = [self, eps](double t, double y) {
    const double xp = self.psi_inv(y + eps);
    const double xm = self.psi_inv(y - eps);
    return (self.beta(t, xp) - self.beta(t, xm)) / (2.0 * eps);
  };
  m.c_x = [](double) { return 0.0; };
  m.c_xx = [](double) { return 0.0; };
  m.hypothesis_k = base_.hypothesis_k;
  m.x0 = psi(base_.x0);
  return m;
}

TransformedModel lamperti_transform(const ModelSpec& model) { return TransformedModel(model); }

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  out << "k,t,x\n";
  for (std::size_t k = 0; k < trajectory.values.size(); ++k) {
    out << k << ',' << format_float(trajectory.grid.node(static_cast<std::int64_t>(k))) << ','
        << format_float(trajectory.values[k]) << '\n';
  }
}

}  // namespace mixedsde
