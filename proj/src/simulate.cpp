#include "pvtrack/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace pvtrack::simulate {

std::string to_string(TrackerKind kind) {
  switch (kind) {
    case TrackerKind::Opgd: return "opgd";
    case TrackerKind::PerturbObserve: return "po";
    case TrackerKind::ConstantVoltage: return "constant";
    case TrackerKind::Oracle: return "oracle";
  }
  throw std::logic_error("unknown tracker kind");
}

TrackerKind tracker_from_name(const std::string& name) {
  if (name == "opgd") return TrackerKind::Opgd;
  if (name == "po") return TrackerKind::PerturbObserve;
  if (name == "constant") return TrackerKind::ConstantVoltage;
  if (name == "oracle") return TrackerKind::Oracle;
  throw std::invalid_argument("unknown tracker '" + name + "' (opgd|po|constant|oracle)");
}

namespace {

Vector initial_vector(const PlantModel& model, const RunOptions& options) {
  const Scalar x0 = options.initial_voltage >= 0 ? options.initial_voltage
                                                 : 0.8 * voc_at(model, stc());
  return Vector::Constant(model.module_count, x0);
}

std::vector<StepRecord> run_core(const PlantModel& model, const Scenario& scenario,
                                 const RunOptions& options, const Vector& x0) {
  trackers::validate(options.config);
  if (options.tracker == TrackerKind::ConstantVoltage) {
    const Scalar setpoint = options.config.constant_setpoint;
    if (!(setpoint > 0) || !(setpoint < voc_at(model, stc())))
      throw std::invalid_argument("run: constant setpoint must lie in (0, Voc at STC)");
  }

  trackers::TrackerState state{x0, std::nullopt, options.config.constant_setpoint};
  const Scalar dt = scenario.step_seconds;
  Scalar prev_power = 0;
  {
    const Environment& env0 = scenario.samples.front().env;
    const Scalar voc0 = voc_at(model, env0);
    prev_power = array_power(model, env0, x0.cwiseMax(0.0).cwiseMin(voc0));
  }

  std::vector<StepRecord> records;
  records.reserve(scenario.samples.size());

  for (const Sample& sample : scenario.samples) {
    const Environment& env = sample.env;
    const FeasibleSet set = realize(sample.directive, model, env, prev_power, dt);
    const Vector x_star = constrained_oracle(model, env, set);

    // Operating point admissible under the current environment.
    state.x = state.x.cwiseMax(0.0).cwiseMin(voc_at(model, env));

    switch (options.tracker) {
      case TrackerKind::Opgd:
        state = trackers::opgd_step(state, cost_gradient(model, env, state.x), set,
                                    options.config);
        break;
      case TrackerKind::PerturbObserve:
        state = trackers::po_step(state, array_power(model, env, state.x), set,
                                  options.config);
        break;
      case TrackerKind::ConstantVoltage:
        state = trackers::constant_voltage_step(state, set);
        break;
      case TrackerKind::Oracle:
        state.x = x_star;
        break;
    }

    StepRecord record;
    record.t = sample.time_index;
    record.x = state.x;
    record.x_star = x_star;
    record.f_x = array_cost(model, env, state.x);
    record.f_star = array_cost(model, env, x_star);
    record.power_w = -record.f_x;
    record.set = set;
    record.mode = sample.directive.mode;

    if (!set.contains(record.x))
      throw std::runtime_error("run: infeasible iterate at step " + std::to_string(record.t));
    if (record.f_x < record.f_star - 1e-9)
      throw std::runtime_error("run: oracle dominance violated at step " +
                               std::to_string(record.t));

    prev_power = record.power_w;
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

RunResult run_tracker(const PlantModel& model, const Scenario& scenario,
                      const RunOptions& options) {
  validate(scenario);
  const Vector x0 = initial_vector(model, options);

  RunResult result;
  result.x0 = x0;
  result.records = run_core(model, scenario, options, x0);

  if (options.tracker == TrackerKind::ConstantVoltage) {
    result.summary = summarize(result.records, result.records, scenario.step_seconds,
                               to_string(options.tracker), model.module_count);
  } else {
    RunOptions comparator_options = options;
    comparator_options.tracker = TrackerKind::ConstantVoltage;
    const auto comparator = run_core(model, scenario, comparator_options, x0);
    result.summary = summarize(result.records, comparator, scenario.step_seconds,
                               to_string(options.tracker), model.module_count);
  }
  return result;
}

BoundOptimalRun run_opgd_bound_optimal(const PlantModel& model, const Scenario& scenario,
                                       RunOptions options, int max_iterations,
                                       Scalar tolerance) {
  options.tracker = TrackerKind::Opgd;
  BoundOptimalRun out;
  Scalar alpha = options.config.opgd_step_size;
  for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
    options.config.opgd_step_size = alpha;
    out.run = run_tracker(model, scenario, options);
    out.constants = bounds::estimate_constants(
        model, scenario, bounds::visited_hulls(out.run.records, out.run.x0),
        out.run.records);
    out.alpha = alpha;  // the step size this run actually used
    const Scalar next = 2.0 / (out.constants.lipschitz_l + out.constants.mu);
    if (std::abs(next - alpha) <= tolerance * std::max(Scalar(1), alpha)) break;
    alpha = next;
  }
  return out;
}

namespace {

std::string fmt17(Scalar x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_steps_csv(const std::vector<StepRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "t,x,x_star,power_w,phi_w,mode\n";
  for (const StepRecord& record : records) {
    out << record.t << ',' << fmt17(record.x.mean()) << ',' << fmt17(record.x_star.mean())
        << ',' << fmt17(record.power_w) << ',' << fmt17(record.phi()) << ','
        << mode_name(record.mode) << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<CsvStep> read_steps_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::string line;
  if (!std::getline(in, line) || line != "t,x,x_star,power_w,phi_w,mode")
    throw std::runtime_error(path + ": bad step log header");

  std::vector<CsvStep> steps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    CsvStep step;
    std::getline(fields, field, ','); step.t = std::stol(field);
    std::getline(fields, field, ','); step.x = std::stod(field);
    std::getline(fields, field, ','); step.x_star = std::stod(field);
    std::getline(fields, field, ','); step.power_w = std::stod(field);
    std::getline(fields, field, ','); step.phi_w = std::stod(field);
    std::getline(fields, field);      step.mode = mode_from_name(field);
    steps.push_back(step);
  }
  if (steps.empty()) throw std::runtime_error(path + ": no data rows");
  return steps;
}

void write_summary_json(const RunSummary& summary, const RunOptions& options,
                        const std::string& scenario_path, const std::string& path) {
  nlohmann::json j;
  j["horizon"] = summary.horizon;
  j["dt"] = summary.dt;
  j["tracker"] = summary.tracker;
  j["modules"] = summary.modules;
  j["avg_dynamic_regret_w"] = summary.avg_dynamic_regret_w;
  j["cumulative_dynamic_regret_w"] = summary.cumulative_dynamic_regret_w;
  j["static_regret_w"] = summary.static_regret_w;
  j["final_tracking_error_v"] = summary.final_tracking_error_v;
  j["scenario_csv"] = scenario_path;
  j["config"] = {{"alpha", options.config.opgd_step_size},
                 {"perturb", options.config.po_perturb},
                 {"setpoint", options.config.constant_setpoint},
                 {"initial_voltage", options.initial_voltage}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

void write_bound_report_json(const bounds::ConvexityConstants& constants,
                             const bounds::BoundReport& report, const std::string& note,
                             const std::string& path) {
  nlohmann::json j;
  j["constants"] = {{"mu", constants.mu},
                    {"lipschitz_l", constants.lipschitz_l},
                    {"grad_bound_g", constants.grad_bound_g},
                    {"variability_v", constants.variability_v},
                    {"feasibility_d", constants.feasibility_d}};
  j["checks"] = nlohmann::json::array();
  for (const auto& check : report.checks)
    j["checks"].push_back({{"name", check.name},
                           {"pass", check.pass},
                           {"violations", check.violations},
                           {"bound", check.bound},
                           {"worst_ratio", check.worst_ratio},
                           {"worst_step", check.worst_step}});
  if (!note.empty()) j["note"] = note;
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

}  // namespace pvtrack::simulate
