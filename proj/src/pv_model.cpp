#include "pvtrack/pv_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pvtrack {

namespace {

bool finite_positive(Scalar x) { return std::isfinite(x) && x > 0; }

}  // namespace

void validate(const ModuleDatasheet& sheet) {
  if (!finite_positive(sheet.mpp_voltage) || sheet.mpp_voltage >= sheet.open_circuit_voltage)
    throw std::invalid_argument("datasheet: require 0 < mpp_voltage < open_circuit_voltage");
  if (!finite_positive(sheet.mpp_current) || sheet.mpp_current >= sheet.short_circuit_current)
    throw std::invalid_argument("datasheet: require 0 < mpp_current < short_circuit_current");
  if (!finite_positive(sheet.mpp_power))
    throw std::invalid_argument("datasheet: require mpp_power > 0");
  const Scalar product = sheet.mpp_voltage * sheet.mpp_current;
  if (std::abs(sheet.mpp_power - product) > 0.005 * sheet.mpp_power)
    throw std::invalid_argument("datasheet: mpp_power inconsistent with mpp_voltage * mpp_current");
}

void validate(const DiodeParams& diode) {
  if (!finite_positive(diode.light_current_stc) || !finite_positive(diode.saturation_current) ||
      !finite_positive(diode.thermal_voltage_stc))
    throw std::invalid_argument("diode params: all parameters must be positive");
  if (diode.saturation_current / diode.light_current_stc >= 1e-3)
    throw std::invalid_argument("diode params: saturation current not small against light current");
}

void validate(const Environment& env) {
  if (!std::isfinite(env.irradiance) || env.irradiance < 0)
    throw std::invalid_argument("environment: irradiance must be >= 0");
  if (!finite_positive(env.temperature))
    throw std::invalid_argument("environment: temperature must be > 0 K");
}

DiodeParams fit_diode_params(const ModuleDatasheet& sheet) {
  validate(sheet);
  const Scalar isc = sheet.short_circuit_current;
  const Scalar voc = sheet.open_circuit_voltage;
  const Scalar vmpp = sheet.mpp_voltage;
  const Scalar impp = sheet.mpp_current;

  // With I_L = Isc and I_o = Isc*exp(-Voc/Vt) (from I(Voc) = 0), the second
  // condition reduces to a scalar equation in Vt, strictly decreasing in Vt.
  const auto residual = [&](Scalar vt) {
    return isc * (1.0 - std::exp((vmpp - voc) / vt)) - impp;
  };

  Scalar lo = 0.5, hi = 10.0;
  Scalar flo = residual(lo), fhi = residual(hi);
  if (!(flo > 0 && fhi < 0))
    throw std::runtime_error("fit_diode_params: no sign change on [0.5, 10] V, datasheet inconsistent");
  for (int i = 0; i < 200 && (hi - lo) > 1e-14 * hi; ++i) {
    const Scalar mid = 0.5 * (lo + hi);
    (residual(mid) > 0 ? lo : hi) = mid;
  }
  const Scalar vt = 0.5 * (lo + hi);

  DiodeParams diode;
  diode.light_current_stc = isc;
  diode.thermal_voltage_stc = vt;
  diode.saturation_current = isc * std::exp(-voc / vt);
  validate(diode);

  const Scalar r_voc = std::abs(diode.light_current_stc -
                                diode.saturation_current * std::exp(voc / vt)) / isc;
  const Scalar r_mpp = std::abs(residual(vt)) / impp;
  if (r_voc > 1e-9 || r_mpp > 1e-9)
    throw std::runtime_error("fit_diode_params: fit residuals did not converge below 1e-9");
  return diode;
}

PlantModel make_plant(const ModuleDatasheet& sheet, int module_count) {
  if (module_count < 1) throw std::invalid_argument("make_plant: module_count must be >= 1");
  PlantModel model{fit_diode_params(sheet), module_count, sheet};
  const Scalar p = power(model, stc(), sheet.mpp_voltage);
  if (std::abs(p - sheet.mpp_power) > 0.005 * sheet.mpp_power)
    throw std::runtime_error("make_plant: fitted power at (Vmpp, STC) off datasheet Pmax by >0.5%");
  return model;
}

Scalar light_current(const PlantModel& model, const Environment& env) {
  return model.diode.light_current_stc * env.irradiance / kStcIrradiance;
}

Scalar thermal_voltage(const PlantModel& model, const Environment& env) {
  return model.diode.thermal_voltage_stc * env.temperature / kStcTemperature;
}

Scalar voc_at(const PlantModel& model, const Environment& env) {
  const Scalar il = light_current(model, env);
  const Scalar io = model.diode.saturation_current;
  if (il <= io) return 0.0;  // dark-module convention
  return thermal_voltage(model, env) * std::log(il / io);
}

namespace {

void check_voltage_domain(const PlantModel& model, const Environment& env, Scalar v) {
  const Scalar voc = voc_at(model, env);
  const Scalar slack = 1e-9 * std::max(Scalar(1), voc);
  if (!std::isfinite(v) || v < -slack || v > voc + slack)
    throw std::domain_error("voltage " + std::to_string(v) + " outside [0, " +
                            std::to_string(voc) + "]");
}

}  // namespace

Scalar current(const PlantModel& model, const Environment& env, Scalar v) {
  check_voltage_domain(model, env, v);
  return light_current(model, env) -
         model.diode.saturation_current * std::exp(v / thermal_voltage(model, env));
}

Scalar power(const PlantModel& model, const Environment& env, Scalar v) {
  return v * current(model, env, v);
}

Scalar array_power(const PlantModel& model, const Environment& env, VectorRef x) {
  Scalar total = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) total += power(model, env, x[i]);
  return total;
}

Scalar cost(const PlantModel& model, const Environment& env, Scalar v) {
  return -power(model, env, v);
}

Scalar array_cost(const PlantModel& model, const Environment& env, VectorRef x) {
  return -array_power(model, env, x);
}

Scalar cost_gradient(const PlantModel& model, const Environment& env, Scalar v) {
  check_voltage_domain(model, env, v);
  const Scalar vt = thermal_voltage(model, env);
  return -light_current(model, env) +
         model.diode.saturation_current * std::exp(v / vt) * (1.0 + v / vt);
}

Vector cost_gradient(const PlantModel& model, const Environment& env, VectorRef x) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = cost_gradient(model, env, x[i]);
  return g;
}

Scalar cost_curvature(const PlantModel& model, const Environment& env, Scalar v) {
  check_voltage_domain(model, env, v);
  const Scalar vt = thermal_voltage(model, env);
  return model.diode.saturation_current * std::exp(v / vt) * (2.0 / vt + v / (vt * vt));
}

PowerPoint mpp_oracle(const PlantModel& model, const Environment& env) {
  validate(env);
  const Scalar voc = voc_at(model, env);
  if (voc <= 0) return {0.0, 0.0};

  const Scalar il = light_current(model, env);
  const Scalar io = model.diode.saturation_current;
  const Scalar vt = thermal_voltage(model, env);
  // dP/dv = I_L - I_o*exp(v/Vt)*(1 + v/Vt): positive at 0, negative at Voc,
  // strictly decreasing, so the bracketed Newton iteration cannot escape.
  const auto dp = [&](Scalar v) { return il - io * std::exp(v / vt) * (1.0 + v / vt); };
  const auto d2p = [&](Scalar v) { return -io * std::exp(v / vt) * (2.0 / vt + v / (vt * vt)); };

  Scalar lo = 0, hi = voc, v = 0.8 * voc;
  for (int i = 0; i < 200; ++i) {
    const Scalar g = dp(v);
    if (g > 0) lo = v; else hi = v;
    Scalar next = v - g / d2p(v);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - v) < 1e-12 * std::max(Scalar(1), v)) { v = next; break; }
    v = next;
  }
  return {v, power(model, env, v)};
}

}  // namespace pvtrack
