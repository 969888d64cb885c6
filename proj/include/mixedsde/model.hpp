#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mixedsde/noise.hpp"

namespace mixedsde {

/// Coefficients of the equation
///   dX = a(t,X) dt + b(t,X) dW + c(X) dB^H,  X_0 = x0,
/// with user-supplied state derivatives (validated by finite
/// differences, not auto-derived) and the hypothesis constant K.
/// Coefficient functions must be pure; ModelSpec is immutable in use
/// and safe to evaluate concurrently.
struct ModelSpec {
  std::string name;
  std::function<double(double, double)> a;    // (t, x)
  std::function<double(double, double)> b;    // (t, x)
  std::function<double(double)> c;            // (x)
  std::function<double(double, double)> a_x;  // ∂a/∂x
  std::function<double(double, double)> b_x;  // ∂b/∂x
  std::function<double(double)> c_x;          // c'
  std::function<double(double)> c_xx;         // c''
  double hypothesis_k = 0.0;
  double x0 = 0.0;
};

/// Finite probing window for the hypothesis checks. The hypotheses are
/// stated for all (t, x); a grid probe can only falsify them, which is
/// exactly what check_hypotheses reports.
struct ProbeDomain {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  int t_samples = 0;
  int x_samples = 0;

  static ProbeDomain make(double t_lo, double t_hi, double x_lo, double x_hi,
                          int t_samples, int x_samples);
};

struct HypothesisReport {
  struct Witness {
    double t = 0.0;
    double s = 0.0;  // second time of the Hölder pair; unused elsewhere
    double x = 0.0;
  };

  /// One probed constraint: `worst` is the largest left-hand side seen
  /// (bound checks) or the largest Hölder ratio; pass means worst <= K
  /// (and, for the positivity part of (C), that c stayed >= 1/K).
  struct Check {
    bool pass = false;
    double worst = 0.0;
    Witness where;
  };

  Check bound_a;       // (A): |a| + |b| + |a_x| + |b_x| <= K
  Check holder_b;      // (B): time-Hölder ratio with exponent 2H-1
  Check positivity_c;  // (C): c >= 1/K and c + 1/c + |c'| + |c''| <= K

  /// Central-difference validation of one declared derivative field.
  struct DerivativeCheck {
    std::string field;
    bool pass = false;
    double worst_relative_error = 0.0;
    Witness where;
  };
  std::vector<DerivativeCheck> derivative_checks;

  bool all_pass() const;
};

/// Probes hypotheses (A), (B), (C) on the domain grid and
/// cross-validates the declared derivatives against central finite
/// differences. Throws EvaluationError if a coefficient returns a
/// non-finite value.
HypothesisReport check_hypotheses(const ModelSpec& model, HurstIndex h,
                                  const ProbeDomain& domain);

/// Constant-coefficient model with the exact solution
/// x0 + a0 t + b0 W_t + c0 B^H_t; the Euler recursion telescopes to it.
ModelSpec make_additive_model(double a0, double b0, double c0, double x0);

/// Catalog of benchmark models. `time_hoelder` contains a t^(2H-1) drift
/// term, so the catalog depends on the Hurst index it is built for.
std::vector<ModelSpec> builtin_models(HurstIndex h);
std::vector<std::string> builtin_model_names();
ModelSpec find_builtin_model(const std::string& name, HurstIndex h);

/// Probe window each catalog model is declared to satisfy its
/// hypotheses on.
ProbeDomain builtin_probe_domain();

}  // namespace mixedsde
