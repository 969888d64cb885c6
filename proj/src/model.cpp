#include "mixedsde/model.hpp"

#include <cmath>
#include <limits>

#include "mixedsde/errors.hpp"
#include "mixedsde/textio.hpp"

namespace mixedsde {

namespace {

constexpr double kDerivativeStep = 1e-6;
constexpr double kDerivativeTolerance = 1e-4;  // relative

double checked_eval(const std::function<double(double, double)>& f, double t, double x) {
  const double v = f(t, x);
  if (!std::isfinite(v)) {
    throw EvaluationError("coefficient returned a non-finite value at (t=" +
                              format_float(t) + ", x=" + format_float(x) + ")",
                          t, x);
  }
  return v;
}

double checked_eval(const std::function<double(double)>& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw EvaluationError("coefficient returned a non-finite value at (x=" +
                              format_float(x) + ")",
                          0.0, x);
  }
  return v;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

double relative_error(double approx, double reference) {
  const double scale = std::max({std::abs(approx), std::abs(reference), 1.0});
  return std::abs(approx - reference) / scale;
}

}  // namespace

ProbeDomain ProbeDomain::make(double t_lo, double t_hi, double x_lo, double x_hi,
                              int t_samples, int x_samples) {
  if (!(t_lo < t_hi) || !(x_lo < x_hi)) throw DomainError("probe ranges must be nonempty");
  if (t_samples < 2 || x_samples < 2) throw DomainError("probe sample counts must be >= 2");
  return ProbeDomain{t_lo, t_hi, x_lo, x_hi, t_samples, x_samples};
}

bool HypothesisReport::all_pass() const {
  if (!bound_a.pass || !holder_b.pass || !positivity_c.pass) return false;
  for (const auto& d : derivative_checks) {
    if (!d.pass) return false;
  }
  return true;
}

HypothesisReport check_hypotheses(const ModelSpec& model, HurstIndex h,
                                  const ProbeDomain& domain) {
  const double k = model.hypothesis_k;
  if (!(k > 0.0)) throw DomainError("hypothesis constant K must be positive");

  const auto ts = linspace(domain.t_lo, domain.t_hi, domain.t_samples);
  const auto xs = linspace(domain.x_lo, domain.x_hi, domain.x_samples);

  HypothesisReport report;

  // (A) and (C): pointwise bounds over the grid. The (C) sum is taken
  // literally, so 1/c pinpoints where positivity degrades; a separate
  // flag tracks c >= 1/K (the sum alone can look harmless for c < 0).
  report.bound_a.worst = -std::numeric_limits<double>::infinity();
  report.positivity_c.worst = -std::numeric_limits<double>::infinity();
  bool c_positive = true;
  for (double x : xs) {
    const double c = checked_eval(model.c, x);
    const double c_sum = c + 1.0 / c + std::abs(checked_eval(model.c_x, x)) +
                         std::abs(checked_eval(model.c_xx, x));
    if (!(c >= 1.0 / k)) c_positive = false;
    if (c_sum > report.positivity_c.worst) {
      report.positivity_c.worst = c_sum;
      report.positivity_c.where = {0.0, 0.0, x};
    }
    for (double t : ts) {
      const double a_sum = std::abs(checked_eval(model.a, t, x)) +
                           std::abs(checked_eval(model.b, t, x)) +
                           std::abs(checked_eval(model.a_x, t, x)) +
                           std::abs(checked_eval(model.b_x, t, x));
      if (a_sum > report.bound_a.worst) {
        report.bound_a.worst = a_sum;
        report.bound_a.where = {t, 0.0, x};
      }
    }
  }
  report.bound_a.pass = report.bound_a.worst <= k;
  report.positivity_c.pass = c_positive && report.positivity_c.worst <= k;

  // (B): Hölder ratio in time with exponent 2H-1, over all time pairs.
  // The ratio can peak at well-separated small times, so adjacent pairs
  // are not enough.
  const double exponent = 2.0 * h.value() - 1.0;
  report.holder_b.worst = 0.0;
  report.holder_b.pass = true;
  for (double x : xs) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double ai = checked_eval(model.a, ts[i], x);
      const double bi = checked_eval(model.b, ts[i], x);
      for (std::size_t j = i + 1; j < ts.size(); ++j) {
        const double gap = std::pow(ts[j] - ts[i], exponent);
        const double ratio = (std::abs(checked_eval(model.a, ts[j], x) - ai) +
                              std::abs(checked_eval(model.b, ts[j], x) - bi)) /
                             gap;
        if (ratio > report.holder_b.worst) {
          report.holder_b.worst = ratio;
          report.holder_b.where = {ts[j], ts[i], x};
        }
      }
    }
  }
  report.holder_b.pass = report.holder_b.worst <= k;

  // Finite-difference validation of the declared derivatives. The
  // second derivative of c is differenced from the declared c' rather
  // than twice from c, which would sit at the rounding floor for step
  // 1e-6.
  const double eps = kDerivativeStep;
  auto check_tx = [&](const std::string& field,
                      const std::function<double(double, double)>& value,
                      const std::function<double(double, double)>& declared) {
    HypothesisReport::DerivativeCheck check;
    check.field = field;
    check.worst_relative_error = 0.0;
    for (double t : ts) {
      for (double x : xs) {
        const double fd = (checked_eval(value, t, x + eps) - checked_eval(value, t, x - eps)) /
                          (2.0 * eps);
        const double err = relative_error(fd, checked_eval(declared, t, x));
        if (err > check.worst_relative_error) {
          check.worst_relative_error = err;
          check.where = {t, 0.0, x};
        }
      }
    }
    check.pass = check.worst_relative_error <= kDerivativeTolerance;
    return check;
  };
  auto check_x = [&](const std::string& field,
                     const std::function<double(double)>& value,
                     const std::function<double(double)>& declared) {
    HypothesisReport::DerivativeCheck check;
    check.field = field;
    check.worst_relative_error = 0.0;
    for (double x : xs) {
      const double fd = (checked_eval(value, x + eps) - checked_eval(value, x - eps)) /
                        (2.0 * eps);
      const double err = relative_error(fd, checked_eval(declared, x));
      if (err > check.worst_relative_error) {
        check.worst_relative_error = err;
        check.where = {0.0, 0.0, x};
      }
    }
    check.pass = check.worst_relative_error <= kDerivativeTolerance;
    return check;
  };

  report.derivative_checks.push_back(check_tx("a_x", model.a, model.a_x));
  report.derivative_checks.push_back(check_tx("b_x", model.b, model.b_x));
  report.derivative_checks.push_back(check_x("c_x", model.c, model.c_x));
  report.derivative_checks.push_back(check_x("c_xx", model.c_x, model.c_xx));

  return report;
}

ModelSpec make_additive_model(double a0, double b0, double c0, double x0) {
  if (!(c0 > 0.0)) throw DomainError("additive model requires c0 > 0");
  ModelSpec m;
  m.name = "additive";
  m.a = [a0](double, double) { return a0; };
  m.b = [b0](double, double) { return b0; };
  m.c = [c0](double) { return c0; };
  m.a_x = [](double, double) { return 0.0; };
  m.b_x = [](double, double) { return 0.0; };
  m.c_x = [](double) { return 0.0; };
  m.c_xx = [](double) { return 0.0; };
  m.hypothesis_k = 4.0;
  m.x0 = x0;
  return m;
}

namespace {

ModelSpec make_trig_model() {
  ModelSpec m;
  m.name = "trig";
  m.a = [](double, double x) { return std::cos(x); };
  m.b = [](double, double x) { return 1.0 + 0.5 * std::sin(x); };
  m.c = [](double x) { return 2.0 + std::sin(x); };
  m.a_x = [](double, double x) { return -std::sin(x); };
  m.b_x = [](double, double x) { return 0.5 * std::cos(x); };
  m.c_x = [](double x) { return std::cos(x); };
  m.c_xx = [](double x) { return -std::sin(x); };
  // sup_x [c + 1/c + |c'| + |c''|] is about 4.58 (near x = 1), so the
  // smallest admissible integer K for hypothesis (C) is 5; use 6 for
  // headroom.
  m.hypothesis_k = 6.0;
  m.x0 = 0.0;
  return m;
}

ModelSpec make_time_hoelder_model(HurstIndex h) {
  const double exponent = 2.0 * h.value() - 1.0;
  ModelSpec m;
  m.name = "time-hoelder";
  m.a = [exponent](double t, double x) {
    return 0.5 * std::pow(std::abs(t), exponent) + 0.5 * std::cos(x);
  };
  m.b = [](double, double x) { return 1.0 + 0.5 * std::sin(x); };
  m.c = [](double x) { return 2.0 + 0.5 * std::sin(x); };
  m.a_x = [](double, double x) { return -0.5 * std::sin(x); };
  m.b_x = [](double, double x) { return 0.5 * std::cos(x); };
  m.c_x = [](double x) { return 0.5 * std::cos(x); };
  m.c_xx = [](double x) { return -0.5 * std::sin(x); };
  m.hypothesis_k = 4.0;
  m.x0 = 0.5;
  return m;
}

}  // namespace

std::vector<ModelSpec> builtin_models(HurstIndex h) {
  std::vector<ModelSpec> catalog;
  catalog.push_back(make_additive_model(1.0, 1.0, 1.0, 0.0));
  catalog.push_back(make_trig_model());
  catalog.push_back(make_time_hoelder_model(h));
  return catalog;
}

std::vector<std::string> builtin_model_names() {
  return {"additive", "trig", "time-hoelder"};
}

ModelSpec find_builtin_model(const std::string& name, HurstIndex h) {
  for (auto& model : builtin_models(h)) {
    if (model.name == name) return model;
  }
  throw DomainError("unknown model '" + name + "'; catalog: additive, trig, time-hoelder");
}

ProbeDomain builtin_probe_domain() {
  return ProbeDomain::make(0.0, 1.0, -10.0, 10.0, 41, 201);
}

}  // namespace mixedsde
