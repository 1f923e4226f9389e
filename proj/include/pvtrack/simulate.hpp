#pragma once

#include <string>
#include <vector>

#include "pvtrack/bounds.hpp"
#include "pvtrack/metrics.hpp"
#include "pvtrack/scenario.hpp"
#include "pvtrack/trackers.hpp"
#include "pvtrack/types.hpp"

namespace pvtrack::simulate {

enum class TrackerKind { Opgd, PerturbObserve, ConstantVoltage, Oracle };

std::string to_string(TrackerKind kind);
TrackerKind tracker_from_name(const std::string& name);

struct RunOptions {
  TrackerKind tracker = TrackerKind::Opgd;
  trackers::StepConfig config{};
  /// Start voltage per module; negative selects 0.8 * Voc(STC).
  Scalar initial_voltage = -1;
};

struct RunResult {
  std::vector<StepRecord> records;
  RunSummary summary;
  Vector x0;
};

/// Per-step loop: realize the constraint set, advance the tracker, solve the
/// per-step optimum, record. The previous operating point is clamped into
/// [0, Voc(env_t)] before it is measured, since the plant cannot sit above
/// open-circuit voltage when irradiance collapses. The summary's static
/// comparator is the clamped constant-voltage replay of the same scenario.
RunResult run_tracker(const PlantModel& model, const Scenario& scenario,
                      const RunOptions& options);

struct BoundOptimalRun {
  RunResult run;
  bounds::ConvexityConstants constants;  // estimated on the final run's visited hulls
  Scalar alpha = 0;                      // 2 / (L + mu) at the fixed point
  int iterations = 0;
};

/// Fixed-point iteration of (run -> estimate constants on visited hulls ->
/// alpha = 2/(L+mu)) until alpha stabilizes; the constants depend on the
/// region the run visits, so one pass is not self-consistent.
BoundOptimalRun run_opgd_bound_optimal(const PlantModel& model, const Scenario& scenario,
                                       RunOptions options, int max_iterations = 8,
                                       Scalar tolerance = 1e-9);

/// Step log columns: t,x,x_star,power_w,phi_w,mode with x and x_star as the
/// per-module voltage (coordinates stay uniform under uniform irradiance).
void write_steps_csv(const std::vector<StepRecord>& records, const std::string& path);

struct CsvStep {
  long t = 0;
  Scalar x = 0;
  Scalar x_star = 0;
  Scalar power_w = 0;
  Scalar phi_w = 0;
  Mode mode = Mode::Mppt;
};

std::vector<CsvStep> read_steps_csv(const std::string& path);

void write_summary_json(const RunSummary& summary, const RunOptions& options,
                        const std::string& scenario_path, const std::string& path);

void write_bound_report_json(const bounds::ConvexityConstants& constants,
                             const bounds::BoundReport& report, const std::string& note,
                             const std::string& path);

}  // namespace pvtrack::simulate
