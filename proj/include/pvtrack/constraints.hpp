#pragma once

#include "pvtrack/pv_model.hpp"
#include "pvtrack/scenario.hpp"
#include "pvtrack/types.hpp"

namespace pvtrack {

/// Per-step feasible voltage box over the module array: closed, convex and
/// non-empty by construction.
struct FeasibleSet {
  Vector lower;
  Vector upper;

  bool contains(VectorRef x, Scalar tol = 0) const;
};

void validate(const FeasibleSet& set);

FeasibleSet uniform_box(Scalar lower, Scalar upper, int modules);

/// Realizes the directive as a voltage interval per module under env.
///
/// Power caps are realized on the high-voltage branch of the P-V curve
/// ([V_high, Voc] with P(V_high) = cap/n), which keeps the set an interval.
/// DeltaPower maps to an absolute cap of n*Pmpp - reserve; RampRate caps at
/// prev_power + rate*dt (upward ramps only). A cap at or below zero
/// degenerates to the single point {Voc}.
FeasibleSet realize(const ConstraintDirective& directive, const PlantModel& model,
                    const Environment& env, Scalar prev_power, Scalar dt);

/// Euclidean projection onto the box: coordinatewise clamp.
Vector project(VectorRef x, const FeasibleSet& set);

}  // namespace pvtrack
