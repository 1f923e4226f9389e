#include "pvtrack/trackers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pvtrack::trackers {

void validate(const StepConfig& config) {
  if (!(config.opgd_step_size > 0)) throw std::invalid_argument("config: step size must be > 0");
  if (!(config.po_perturb > 0)) throw std::invalid_argument("config: perturbation must be > 0");
}

TrackerState opgd_step(const TrackerState& state, VectorRef grad, const FeasibleSet& set,
                       const StepConfig& config) {
  validate(config);
  if (grad.size() != state.x.size())
    throw std::invalid_argument("opgd_step: gradient dimension mismatch");
  if (!grad.allFinite()) throw std::invalid_argument("opgd_step: non-finite gradient");

  TrackerState next = state;
  next.x = project(state.x - config.opgd_step_size * grad, set);
  return next;
}

TrackerState po_step(const TrackerState& state, Scalar measured_power, const FeasibleSet& set,
                     const StepConfig& config) {
  validate(config);
  if (!std::isfinite(measured_power))
    throw std::invalid_argument("po_step: non-finite power measurement");

  Scalar direction = 1;
  if (state.po)
    direction = measured_power > state.po->last_power ? state.po->direction
                                                      : -state.po->direction;

  TrackerState next = state;
  next.x = project((state.x.array() + direction * config.po_perturb).matrix(), set);
  next.po = PoMemory{measured_power, direction};
  return next;
}

TrackerState constant_voltage_step(const TrackerState& state, const FeasibleSet& set) {
  TrackerState next = state;
  next.x = project(Vector::Constant(state.x.size(), state.setpoint), set);
  return next;
}

Scalar duty_cycle(Scalar v_setpoint, Scalar bus_voltage) {
  if (!(bus_voltage > 0)) throw std::invalid_argument("duty_cycle: bus voltage must be > 0");
  if (!std::isfinite(v_setpoint)) throw std::invalid_argument("duty_cycle: non-finite setpoint");
  return std::clamp(v_setpoint / bus_voltage, Scalar(0), Scalar(1));
}

}  // namespace pvtrack::trackers
