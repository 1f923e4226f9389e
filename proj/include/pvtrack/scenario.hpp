#pragma once

#include <string>
#include <vector>

#include "pvtrack/pv_model.hpp"
#include "pvtrack/types.hpp"

namespace pvtrack {

/// Operational zone requested by the grid at one step.
enum class Mode { Mppt, DeltaPower, RampRate, AbsolutePower, VoltageMax };

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct ConstraintDirective {
  Mode mode = Mode::Mppt;
  /// Watts for DeltaPower (reserve) / RampRate (W/s) / AbsolutePower (cap),
  /// volts for VoltageMax, ignored (0) for Mppt.
  Scalar limit = 0;

  bool operator==(const ConstraintDirective&) const = default;
};

void validate(const ConstraintDirective& directive);

struct Sample {
  long time_index = 0;
  Environment env;
  ConstraintDirective directive;

  bool operator==(const Sample&) const = default;
};

struct Scenario {
  Scalar step_seconds = 0.1;
  std::vector<Sample> samples;

  long horizon() const { return static_cast<long>(samples.size()); }
  bool operator==(const Scenario&) const = default;
};

/// Throws unless step_seconds > 0, samples nonempty, time indices strictly
/// increasing and every sample valid.
void validate(const Scenario& scenario);

/// Knobs of the seeded irradiance walk. The walk mean-reverts toward
/// base_irradiance; within any 2 s (20-step) window the net irradiance
/// change never exceeds max_step_change, and occasional full-scale window
/// moves exercise that limit.
struct FluctuationSpec {
  Scalar base_irradiance = 1000.0;           // W/m^2
  Scalar max_step_change = 80.0;             // W/m^2 per 2 s window
  std::vector<Scalar> temperature_profile = {kStcTemperature};  // K, piecewise constant
  unsigned seed = 42;
};

void validate(const FluctuationSpec& spec);

/// Deterministic given the seed. Generated irradiance stays in [0, 1200]
/// and on a 1e-5 W/m^2 grid so the 9-significant-digit CSV form is exact.
/// All directives are Mppt; overlay constraint patterns separately.
Scenario generate_fluctuating(const FluctuationSpec& spec, long horizon,
                              Scalar step_seconds = 0.1);

/// Repeats `cycle` over the scenario, holding each directive for
/// steps_per_mode consecutive samples.
void apply_mode_cycle(Scenario& scenario, const std::vector<ConstraintDirective>& cycle,
                      long steps_per_mode);

/// CSV with header `t,irradiance_wm2,temperature_c,mode,limit` and a leading
/// `# dt=<seconds>` comment line. Errors carry "path:line:" prefixes.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace pvtrack
