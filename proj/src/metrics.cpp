#include "pvtrack/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace pvtrack {

Vector constrained_oracle(const PlantModel& model, const Environment& env,
                          const FeasibleSet& set) {
  validate(set);
  const Scalar v_mpp = mpp_oracle(model, env).voltage;
  return Vector::Constant(set.lower.size(), v_mpp).cwiseMax(set.lower).cwiseMin(set.upper);
}

Scalar tracking_error(VectorRef x, VectorRef x_star) {
  if (x.size() != x_star.size())
    throw std::invalid_argument("tracking_error: length mismatch");
  return (x - x_star).norm();
}

Scalar instantaneous_regret(Scalar f_x, Scalar f_star) { return f_x - f_star; }

RunSummary summarize(const std::vector<StepRecord>& records,
                     const std::vector<StepRecord>& comparator, Scalar dt,
                     const std::string& tracker, int modules) {
  if (records.empty()) throw std::invalid_argument("summarize: empty records");
  if (comparator.size() != records.size())
    throw std::invalid_argument("summarize: comparator horizon mismatch");
  if (!(dt > 0)) throw std::invalid_argument("summarize: dt must be > 0");

  const Scalar T = static_cast<Scalar>(records.size());
  Scalar phi_sum = 0, cost_sum = 0, comparator_cost_sum = 0;
  for (size_t i = 0; i < records.size(); ++i) {
    phi_sum += records[i].phi();
    cost_sum += records[i].f_x;
    comparator_cost_sum += comparator[i].f_x;
  }

  RunSummary summary;
  summary.horizon = static_cast<long>(records.size());
  summary.dt = dt;
  summary.tracker = tracker;
  summary.modules = modules;
  summary.avg_dynamic_regret_w = phi_sum / T;
  summary.cumulative_dynamic_regret_w = phi_sum;
  summary.static_regret_w = cost_sum / T - comparator_cost_sum / T;
  summary.final_tracking_error_v = records.back().tracking_error();
  return summary;
}

}  // namespace pvtrack
