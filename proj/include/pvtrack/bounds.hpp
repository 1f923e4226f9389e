#pragma once

#include <string>
#include <vector>

#include "pvtrack/metrics.hpp"
#include "pvtrack/scenario.hpp"
#include "pvtrack/types.hpp"

namespace pvtrack::bounds {

/// Empirical constants of the cost family over the estimated region:
/// curvature bracket [mu, lipschitz_l], uniform gradient bound G, temporal
/// gradient variability V, and the finite-time feasibility radius D.
struct ConvexityConstants {
  Scalar mu = 0;            // W/V^2, min cost curvature
  Scalar lipschitz_l = 0;   // W/V^2, max cost curvature
  Scalar grad_bound_g = 0;  // W/V, max ||grad f_t|| over the region
  Scalar variability_v = 0; // W/V, max_t ||grad f_{t+1}(x*_{t+1}) - grad f_t(x*_{t+1})||
  Scalar feasibility_d = 0; // V, max_t ||x_{t+1} - x*_t|| along the trajectory
};

void validate(const ConvexityConstants& constants);

/// Curvature/gradient extremes are taken on a `grid_step` voltage grid
/// (endpoints always included) over each step's estimation window;
/// variability uses the per-step minimizer over the supplied windows, and
/// the feasibility radius tracks the supplied trajectory. Throws when the
/// scenario is dark throughout or every window is a single point.
ConvexityConstants estimate_constants(const PlantModel& model, const Scenario& scenario,
                                      const std::vector<FeasibleSet>& domains,
                                      const std::vector<StepRecord>& trajectory,
                                      Scalar grid_step = 1e-3);

/// Per-step estimation windows covering everything a run touched: the hull
/// of {previous iterate, iterate, x*_t, x*_{t+1}} per module. Curvature
/// extremes over these windows bracket every mean-value segment used by the
/// per-step, tail, and variability inequalities.
std::vector<FeasibleSet> visited_hulls(const std::vector<StepRecord>& records, VectorRef x0);

struct InequalityCheck {
  std::string name;
  bool pass = true;
  long violations = 0;
  Scalar bound = 0;        // right-hand side (worst-case for per-step bounds)
  Scalar worst_ratio = 0;  // max left/right ratio observed
  long worst_step = -1;
};

struct BoundReport {
  std::vector<InequalityCheck> checks;
  bool all_pass() const;
};

/// Per-step inequality phi_t <= (L/2) e_t^2 plus the tail limit
/// phi_t <= L V^2 (L+mu)^2 / (8 mu^2) over the final 20% of steps (the tail
/// limit presumes the run used alpha = 2/(L+mu)). Requires an all-MPPT run.
BoundReport check_unconstrained_bounds(const std::vector<StepRecord>& run,
                                       const ConvexityConstants& constants);

/// Temporal-variability inequality ||x*_{t+1} - x*_t|| <= V/mu for every
/// consecutive pair of per-step optima over the given domains.
BoundReport check_variability_bound(const PlantModel& model, const Scenario& scenario,
                                    const std::vector<FeasibleSet>& domains,
                                    const ConvexityConstants& constants);

}  // namespace pvtrack::bounds
