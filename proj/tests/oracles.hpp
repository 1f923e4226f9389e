#pragma once

// Test-only reference routes, kept independent of the library internals they
// check: exhaustive grid scans, sign-change bisection, and a long-double
// re-statement of the module power law for finite differencing.

#include <cmath>

#include "pvtrack/pv_model.hpp"

namespace oracles {

template <typename Fn>
double grid_argmax(const Fn& fn, double lo, double hi, double step) {
  double best_v = lo, best = fn(lo);
  for (double v = lo; v <= hi; v += step) {
    const double y = fn(v);
    if (y > best) { best = y; best_v = v; }
  }
  if (fn(hi) > best) best_v = hi;
  return best_v;
}

template <typename Fn>
double grid_argmin(const Fn& fn, double lo, double hi, double step) {
  return grid_argmax([&](double v) { return -fn(v); }, lo, hi, step);
}

template <typename Fn>
double bisect_root(const Fn& fn, double lo, double hi, double tol) {
  double flo = fn(lo);
  for (int i = 0; i < 200 && (hi - lo) > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((fn(mid) > 0) == (flo > 0)) { lo = mid; flo = fn(mid); } else { hi = mid; }
  }
  return 0.5 * (lo + hi);
}

inline long double power_formula_ld(const pvtrack::PlantModel& model,
                                    const pvtrack::Environment& env, long double v) {
  const long double il = static_cast<long double>(model.diode.light_current_stc) *
                         env.irradiance / 1000.0L;
  const long double vt = static_cast<long double>(model.diode.thermal_voltage_stc) *
                         env.temperature / 298.15L;
  return v * (il - static_cast<long double>(model.diode.saturation_current) * expl(v / vt));
}

/// Central difference of the negated power, evaluated in long double.
inline double cost_gradient_fd(const pvtrack::PlantModel& model,
                               const pvtrack::Environment& env, double v, double h) {
  const long double fwd = -power_formula_ld(model, env, static_cast<long double>(v) + h);
  const long double bwd = -power_formula_ld(model, env, static_cast<long double>(v) - h);
  return static_cast<double>((fwd - bwd) / (2.0L * h));
}

}  // namespace oracles
