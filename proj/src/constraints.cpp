#include "pvtrack/constraints.hpp"

#include <cmath>
#include <stdexcept>

namespace pvtrack {

bool FeasibleSet::contains(VectorRef x, Scalar tol) const {
  if (x.size() != lower.size()) return false;
  return (x.array() >= lower.array() - tol).all() && (x.array() <= upper.array() + tol).all();
}

void validate(const FeasibleSet& set) {
  if (set.lower.size() == 0 || set.lower.size() != set.upper.size())
    throw std::invalid_argument("feasible set: empty or mismatched bounds");
  if (!set.lower.allFinite() || !set.upper.allFinite())
    throw std::invalid_argument("feasible set: non-finite bounds");
  if ((set.lower.array() < 0).any() || (set.lower.array() > set.upper.array()).any())
    throw std::invalid_argument("feasible set: require 0 <= lower <= upper");
}

FeasibleSet uniform_box(Scalar lower, Scalar upper, int modules) {
  FeasibleSet set{Vector::Constant(modules, lower), Vector::Constant(modules, upper)};
  validate(set);
  return set;
}

namespace {

// Right-branch root of P(v) = cap_m, bisected on [Vmpp, Voc] where the
// power is strictly decreasing from Pmpp to 0.
Scalar right_branch_voltage(const PlantModel& model, const Environment& env,
                            const PowerPoint& mpp, Scalar voc, Scalar cap_m) {
  Scalar lo = mpp.voltage, hi = voc;
  for (int i = 0; i < 200 && (hi - lo) > 1e-12; ++i) {
    const Scalar mid = 0.5 * (lo + hi);
    (power(model, env, mid) > cap_m ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FeasibleSet power_cap_box(const PlantModel& model, const Environment& env, Scalar cap_watts) {
  const Scalar voc = voc_at(model, env);
  const int n = model.module_count;
  const Scalar cap_m = cap_watts / n;
  const PowerPoint mpp = mpp_oracle(model, env);
  if (cap_m >= mpp.power) return uniform_box(0, voc, n);  // cap inactive
  if (cap_m <= 0) return uniform_box(voc, voc, n);        // zero-power limit point
  return uniform_box(right_branch_voltage(model, env, mpp, voc, cap_m), voc, n);
}

}  // namespace

FeasibleSet realize(const ConstraintDirective& directive, const PlantModel& model,
                    const Environment& env, Scalar prev_power, Scalar dt) {
  validate(env);
  validate(directive);
  const Scalar voc = voc_at(model, env);
  const int n = model.module_count;

  switch (directive.mode) {
    case Mode::Mppt:
      return uniform_box(0, voc, n);
    case Mode::VoltageMax:
      return uniform_box(0, std::min(directive.limit, voc), n);
    case Mode::AbsolutePower:
      return power_cap_box(model, env, directive.limit);
    case Mode::DeltaPower: {
      const Scalar available = n * mpp_oracle(model, env).power;
      return power_cap_box(model, env, std::max(Scalar(0), available - directive.limit));
    }
    case Mode::RampRate: {
      if (!(prev_power >= 0) || !(dt > 0))
        throw std::invalid_argument("realize: ramp rate needs prev_power >= 0 and dt > 0");
      return power_cap_box(model, env, prev_power + directive.limit * dt);
    }
  }
  throw std::logic_error("unknown directive mode");
}

Vector project(VectorRef x, const FeasibleSet& set) {
  validate(set);
  if (x.size() != set.lower.size())
    throw std::invalid_argument("project: dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("project: non-finite point");
  return x.cwiseMax(set.lower).cwiseMin(set.upper);
}

}  // namespace pvtrack
