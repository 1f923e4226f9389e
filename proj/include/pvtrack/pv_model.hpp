#pragma once

#include "pvtrack/types.hpp"

namespace pvtrack {

inline constexpr Scalar kStcIrradiance = 1000.0;   // W/m^2
inline constexpr Scalar kStcTemperature = 298.15;  // K (25 C)
inline constexpr Scalar kCelsiusOffset = 273.15;

/// Nameplate values of one module at Standard Test Conditions.
struct ModuleDatasheet {
  Scalar open_circuit_voltage = 36.3;  // V
  Scalar short_circuit_current = 7.84; // A
  Scalar mpp_voltage = 29.2;           // V
  Scalar mpp_current = 7.3;            // A
  Scalar mpp_power = 213.15;           // W

  bool operator==(const ModuleDatasheet&) const = default;
};

/// Throws std::invalid_argument unless 0 < Vmpp < Voc, 0 < Impp < Isc and
/// Pmax agrees with Vmpp*Impp within 0.5%.
void validate(const ModuleDatasheet& sheet);

/// Parameters of the loss-free single-diode current law
///   I(v) = I_L - I_o * exp(v / V_t)
/// with I_L scaled linearly by irradiance and V_t by absolute temperature.
struct DiodeParams {
  Scalar light_current_stc = 0;   // A, I_L at 1000 W/m^2
  Scalar saturation_current = 0;  // A, I_o (held fixed across environments)
  Scalar thermal_voltage_stc = 0; // V, V_t at 298.15 K
};

/// Throws unless all parameters are positive and I_o/I_L < 1e-3.
void validate(const DiodeParams& diode);

struct Environment {
  Scalar irradiance = kStcIrradiance;   // W/m^2
  Scalar temperature = kStcTemperature; // K

  bool operator==(const Environment&) const = default;
};

void validate(const Environment& env);

inline Environment stc() { return {}; }

/// An array of identical modules, one decision voltage per module.
struct PlantModel {
  DiodeParams diode;
  int module_count = 1;
  ModuleDatasheet datasheet;
};

/// Solves the two conditions I(Voc) = 0 and I(Vmpp) = Impp for (I_o, V_t)
/// with I_L pinned to Isc. V_t is found by bisection on [0.5, 10] V; both
/// residuals are verified below 1e-9 in relative terms.
/// Throws std::invalid_argument on a bad datasheet and std::runtime_error
/// when the root-find cannot bracket (inconsistent datasheet).
DiodeParams fit_diode_params(const ModuleDatasheet& sheet);

/// Fits the diode parameters and checks that the per-module power at
/// (Vmpp, STC) lands within 0.5% of the datasheet Pmax.
PlantModel make_plant(const ModuleDatasheet& sheet, int module_count);

Scalar light_current(const PlantModel& model, const Environment& env);
Scalar thermal_voltage(const PlantModel& model, const Environment& env);

/// Open-circuit voltage under env: the root of I(V) = 0, in closed form
/// V_t(env) * ln(I_L(env)/I_o). Dark module (I_L <= I_o) returns 0.
Scalar voc_at(const PlantModel& model, const Environment& env);

/// Module current I(v). Same voltage domain as power().
Scalar current(const PlantModel& model, const Environment& env, Scalar v);

/// Per-module power v*I(v). Throws std::domain_error unless
/// 0 <= v <= voc_at(model, env) (within a 1e-9 slack).
Scalar power(const PlantModel& model, const Environment& env, Scalar v);

/// Array power: sum of per-module power over the decision vector.
Scalar array_power(const PlantModel& model, const Environment& env, VectorRef x);

/// Cost is the negated power, so tracking is a minimization.
Scalar cost(const PlantModel& model, const Environment& env, Scalar v);
Scalar array_cost(const PlantModel& model, const Environment& env, VectorRef x);

/// d(-P)/dv = -I_L + I_o * exp(v/V_t) * (1 + v/V_t).
Scalar cost_gradient(const PlantModel& model, const Environment& env, Scalar v);
Vector cost_gradient(const PlantModel& model, const Environment& env, VectorRef x);

/// d^2(-P)/dv^2 = I_o * exp(v/V_t) * (2/V_t + v/V_t^2); strictly positive,
/// so the cost is strongly convex on any compact voltage interval.
Scalar cost_curvature(const PlantModel& model, const Environment& env, Scalar v);

struct PowerPoint {
  Scalar voltage = 0; // V, per module
  Scalar power = 0;   // W, per module
};

/// Unique per-module maximizer of P over [0, voc_at(env)], found by
/// safeguarded Newton on the power derivative (bisection fallback keeps the
/// bracket). Voltage accurate to 1e-9 V. Dark module returns (0 V, 0 W).
PowerPoint mpp_oracle(const PlantModel& model, const Environment& env);

}  // namespace pvtrack
