#include "pvtrack/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pvtrack::bounds {

namespace {

constexpr Scalar kSlack = 1e-9;

void for_each_grid_point(Scalar lo, Scalar hi, Scalar step, const auto& fn) {
  fn(lo);
  for (Scalar v = lo + step; v < hi; v += step) fn(v);
  if (hi > lo) fn(hi);
}

}  // namespace

void validate(const ConvexityConstants& constants) {
  if (!(constants.mu > 0) || !(constants.mu <= constants.lipschitz_l))
    throw std::invalid_argument("constants: require 0 < mu <= L");
  if (!(constants.grad_bound_g >= 0) || !(constants.variability_v >= 0))
    throw std::invalid_argument("constants: require G >= 0 and V >= 0");
  if (!std::isfinite(constants.feasibility_d) || constants.feasibility_d < 0)
    throw std::invalid_argument("constants: D must be finite and >= 0");
}

ConvexityConstants estimate_constants(const PlantModel& model, const Scenario& scenario,
                                      const std::vector<FeasibleSet>& domains,
                                      const std::vector<StepRecord>& trajectory,
                                      Scalar grid_step) {
  validate(scenario);
  if (domains.size() != static_cast<size_t>(scenario.horizon()))
    throw std::invalid_argument("estimate_constants: one domain per scenario step required");
  if (!(grid_step > 0)) throw std::invalid_argument("estimate_constants: grid step must be > 0");

  bool any_light = false;
  bool any_width = false;
  for (size_t t = 0; t < domains.size(); ++t) {
    if (scenario.samples[t].env.irradiance > 0) any_light = true;
    if ((domains[t].upper - domains[t].lower).maxCoeff() > 0) any_width = true;
  }
  if (!any_light || !any_width)
    throw std::invalid_argument("estimate_constants: degenerate domains (dark or zero-width)");

  ConvexityConstants constants;
  constants.mu = std::numeric_limits<Scalar>::infinity();
  constants.lipschitz_l = 0;
  constants.grad_bound_g = 0;

  for (size_t t = 0; t < domains.size(); ++t) {
    const Environment& env = scenario.samples[t].env;
    if (env.irradiance <= 0) continue;
    const FeasibleSet& dom = domains[t];
    validate(dom);
    Scalar grad_sq = 0;
    for (Eigen::Index i = 0; i < dom.lower.size(); ++i) {
      Scalar gmax = 0;
      for_each_grid_point(dom.lower[i], dom.upper[i], grid_step, [&](Scalar v) {
        const Scalar curv = cost_curvature(model, env, v);
        constants.mu = std::min(constants.mu, curv);
        constants.lipschitz_l = std::max(constants.lipschitz_l, curv);
        gmax = std::max(gmax, std::abs(cost_gradient(model, env, v)));
      });
      grad_sq += gmax * gmax;
    }
    constants.grad_bound_g = std::max(constants.grad_bound_g, std::sqrt(grad_sq));
  }

  for (size_t t = 0; t + 1 < domains.size(); ++t) {
    const Environment& env_now = scenario.samples[t].env;
    const Environment& env_next = scenario.samples[t + 1].env;
    const Vector x_star_next = constrained_oracle(model, env_next, domains[t + 1]);
    const Vector diff = cost_gradient(model, env_next, x_star_next) -
                        cost_gradient(model, env_now, x_star_next);
    constants.variability_v = std::max(constants.variability_v, diff.norm());
  }

  for (const StepRecord& record : trajectory)
    constants.feasibility_d = std::max(constants.feasibility_d, record.tracking_error());

  validate(constants);
  return constants;
}

std::vector<FeasibleSet> visited_hulls(const std::vector<StepRecord>& records, VectorRef x0) {
  if (records.empty()) throw std::invalid_argument("visited_hulls: empty records");
  if (x0.size() != records.front().x.size())
    throw std::invalid_argument("visited_hulls: x0 dimension mismatch");
  std::vector<FeasibleSet> hulls;
  hulls.reserve(records.size());
  for (size_t t = 0; t < records.size(); ++t) {
    Vector lo = records[t].x.cwiseMin(records[t].x_star);
    Vector hi = records[t].x.cwiseMax(records[t].x_star);
    if (t == 0) {
      lo = lo.cwiseMin(x0);
      hi = hi.cwiseMax(x0);
    } else {
      lo = lo.cwiseMin(records[t - 1].x);
      hi = hi.cwiseMax(records[t - 1].x);
    }
    if (t + 1 < records.size()) {
      lo = lo.cwiseMin(records[t + 1].x_star);
      hi = hi.cwiseMax(records[t + 1].x_star);
    }
    hulls.push_back(FeasibleSet{std::move(lo), std::move(hi)});
  }
  return hulls;
}

bool BoundReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const InequalityCheck& c) { return c.pass; });
}

namespace {

void observe(InequalityCheck& check, Scalar lhs, Scalar rhs, long step) {
  if (lhs > rhs + kSlack) {
    check.pass = false;
    ++check.violations;
  }
  // ratios on sub-slack right-hand sides are floating-point noise
  if (rhs > kSlack) {
    const Scalar ratio = lhs / rhs;
    if (ratio > check.worst_ratio) {
      check.worst_ratio = ratio;
      check.worst_step = step;
      check.bound = rhs;
    }
  }
}

}  // namespace

BoundReport check_unconstrained_bounds(const std::vector<StepRecord>& run,
                                       const ConvexityConstants& constants) {
  if (run.empty()) throw std::invalid_argument("check_unconstrained_bounds: empty run");
  for (const StepRecord& record : run)
    if (record.mode != Mode::Mppt)
      throw std::invalid_argument("check_unconstrained_bounds: run has constrained steps");
  validate(constants);

  InequalityCheck per_step{.name = "per_step_curvature"};
  for (const StepRecord& record : run) {
    const Scalar e = record.tracking_error();
    observe(per_step, record.phi(), 0.5 * constants.lipschitz_l * e * e, record.t);
  }

  const Scalar l = constants.lipschitz_l, mu = constants.mu, v = constants.variability_v;
  InequalityCheck tail{.name = "tail_regret_limit"};
  tail.bound = l * v * v * (l + mu) * (l + mu) / (8 * mu * mu);
  const size_t tail_start = run.size() - run.size() / 5;
  for (size_t t = tail_start; t < run.size(); ++t)
    observe(tail, run[t].phi(), tail.bound, run[t].t);

  return BoundReport{{per_step, tail}};
}

BoundReport check_variability_bound(const PlantModel& model, const Scenario& scenario,
                                    const std::vector<FeasibleSet>& domains,
                                    const ConvexityConstants& constants) {
  validate(scenario);
  validate(constants);
  if (domains.size() != static_cast<size_t>(scenario.horizon()))
    throw std::invalid_argument("check_variability_bound: one domain per step required");

  InequalityCheck check{.name = "temporal_variability"};
  check.bound = constants.variability_v / constants.mu;
  Vector prev_star = constrained_oracle(model, scenario.samples[0].env, domains[0]);
  for (size_t t = 1; t < domains.size(); ++t) {
    const Vector star = constrained_oracle(model, scenario.samples[t].env, domains[t]);
    observe(check, (star - prev_star).norm(), check.bound, scenario.samples[t].time_index);
    prev_star = star;
  }
  return BoundReport{{check}};
}

}  // namespace pvtrack::bounds
