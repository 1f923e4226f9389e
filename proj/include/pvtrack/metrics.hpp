#pragma once

#include <string>
#include <vector>

#include "pvtrack/constraints.hpp"
#include "pvtrack/pv_model.hpp"
#include "pvtrack/types.hpp"

namespace pvtrack {

/// One simulation step: the decision applied during step t (feasible in the
/// step's set), the per-step optimum, and the costs of both.
struct StepRecord {
  long t = 0;
  Vector x;        // decision operated during step t, inside `set`
  Vector x_star;   // minimizer of the step cost over `set`
  Scalar f_x = 0;  // array cost (-power) at x, W
  Scalar f_star = 0;
  Scalar power_w = 0;  // array output power at x, W
  FeasibleSet set;
  Mode mode = Mode::Mppt;

  Scalar phi() const { return f_x - f_star; }                 // instantaneous regret, W
  Scalar tracking_error() const { return (x - x_star).norm(); }  // V
};

/// Per-module minimizer of the cost over the box: the unconstrained MPP
/// voltage clamped into each interval (valid because the scalar cost is
/// strictly unimodal). Accurate to 1e-9 V.
Vector constrained_oracle(const PlantModel& model, const Environment& env,
                          const FeasibleSet& set);

/// Euclidean norm ||x - x_star||. Throws on length mismatch.
Scalar tracking_error(VectorRef x, VectorRef x_star);

/// f_x - f_star: the power lost against the per-step constrained optimum.
Scalar instantaneous_regret(Scalar f_x, Scalar f_star);

struct RunSummary {
  long horizon = 0;
  Scalar dt = 0.1;
  std::string tracker;
  int modules = 1;
  Scalar avg_dynamic_regret_w = 0;
  Scalar cumulative_dynamic_regret_w = 0;
  Scalar static_regret_w = 0;          // avg tracker cost minus avg comparator cost
  Scalar final_tracking_error_v = 0;
};

/// Summarizes a run against the constant-voltage comparator trajectory
/// (replayed over the same scenario with per-step clamping). Throws on empty
/// records or a horizon mismatch with the comparator.
RunSummary summarize(const std::vector<StepRecord>& records,
                     const std::vector<StepRecord>& comparator, Scalar dt,
                     const std::string& tracker, int modules);

}  // namespace pvtrack
