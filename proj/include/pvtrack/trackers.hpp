#pragma once

#include <optional>

#include "pvtrack/constraints.hpp"
#include "pvtrack/types.hpp"

namespace pvtrack::trackers {

struct StepConfig {
  Scalar opgd_step_size = 0.2;    // volts per (watt/volt)
  Scalar po_perturb = 0.5;        // volts
  Scalar constant_setpoint = 29;  // volts
};

void validate(const StepConfig& config);

struct PoMemory {
  Scalar last_power = 0;  // W, array power at the previous measurement
  Scalar direction = 1;   // +1 or -1
};

struct TrackerState {
  Vector x;                      // per-module decision voltage
  std::optional<PoMemory> po;    // perturb-and-observe history
  Scalar setpoint = 0;           // constant-voltage policy only
};

/// x' = project(x - alpha * grad, set). Throws on a non-finite gradient.
TrackerState opgd_step(const TrackerState& state, VectorRef grad, const FeasibleSet& set,
                       const StepConfig& config);

/// Hill climbing on the measured array power: keep the direction while the
/// power rises, reverse otherwise. The first step (no history) perturbs
/// upward. Consumes only a scalar power measurement, never a gradient.
TrackerState po_step(const TrackerState& state, Scalar measured_power, const FeasibleSet& set,
                     const StepConfig& config);

/// x' = project(setpoint * 1, set): fixed voltage, reduced to the allowed
/// value whenever a constraint is active.
TrackerState constant_voltage_step(const TrackerState& state, const FeasibleSet& set);

/// Ideal buck mapping d = clamp(v / bus, 0, 1); reporting only.
Scalar duty_cycle(Scalar v_setpoint, Scalar bus_voltage);

}  // namespace pvtrack::trackers
