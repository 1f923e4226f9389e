#include "pvtrack/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "pvtrack/simulate.hpp"

namespace pvtrack::cli {

namespace fs = std::filesystem;

namespace {

struct SheetFlags {
  ModuleDatasheet sheet{};
  int modules = 8;

  void attach(CLI::App* app) {
    app->add_option("--modules", modules, "Number of PV modules")->check(CLI::PositiveNumber);
    app->add_option("--voc", sheet.open_circuit_voltage, "Open-circuit voltage [V]");
    app->add_option("--isc", sheet.short_circuit_current, "Short-circuit current [A]");
    app->add_option("--vmpp", sheet.mpp_voltage, "MPP voltage at STC [V]");
    app->add_option("--impp", sheet.mpp_current, "MPP current at STC [A]");
    app->add_option("--pmax", sheet.mpp_power, "MPP power at STC [W]");
  }

  PlantModel plant() const { return make_plant(sheet, modules); }
};

struct GeneratorFlags {
  FluctuationSpec spec{};
  long horizon = 600;
  Scalar dt = 0.1;
  Scalar temp_c = 25.0;
  std::string modes = "mppt";
  long cycle_steps = 50;
  Scalar vmax_cap = 28.0;
  Scalar abs_cap = 1400.0;
  std::vector<CLI::Option*> options;

  void attach(CLI::App* app) {
    options = {
        app->add_option("--base", spec.base_irradiance, "Base irradiance [W/m^2]"),
        app->add_option("--max-step", spec.max_step_change,
                        "Max change per 2 s window [W/m^2]"),
        app->add_option("--seed", spec.seed, "Generator seed"),
        app->add_option("--horizon", horizon, "Number of steps")->check(CLI::PositiveNumber),
        app->add_option("--dt", dt, "Step length [s]"),
        app->add_option("--temp-c", temp_c, "Module temperature [C]"),
        app->add_option("--modes", modes, "Directive pattern: mppt or cycle")
            ->check(CLI::IsMember({"mppt", "cycle"})),
        app->add_option("--cycle-steps", cycle_steps, "Steps per mode in the cycle"),
        app->add_option("--vmax-cap", vmax_cap, "Voltage cap in the cycle [V]"),
        app->add_option("--abs-cap", abs_cap, "Array power cap in the cycle [W]"),
    };
  }

  bool any_given() const {
    for (const CLI::Option* option : options)
      if (option->count() > 0) return true;
    return false;
  }

  Scenario build() const {
    FluctuationSpec s = spec;
    s.temperature_profile = {temp_c + kCelsiusOffset};
    Scenario scenario = generate_fluctuating(s, horizon, dt);
    if (modes == "cycle")
      apply_mode_cycle(scenario,
                       {{Mode::Mppt, 0},
                        {Mode::VoltageMax, vmax_cap},
                        {Mode::AbsolutePower, abs_cap}},
                       cycle_steps);
    return scenario;
  }
};

struct ScenarioSource {
  std::string path;
  GeneratorFlags generator{};

  void attach(CLI::App* app) {
    app->add_option("--scenario", path, "Scenario CSV path");
    generator.attach(app);
  }

  /// Loads --scenario if given, otherwise generates from the flags
  /// (the defaults reproduce the 600-step seed-42 experiment).
  Scenario resolve(std::string& label) const {
    if (!path.empty()) {
      if (generator.any_given())
        throw std::invalid_argument(
            "give either --scenario or generator flags, not both");
      label = path;
      return load_scenario(path);
    }
    label = "<generated base=" + std::to_string(generator.spec.base_irradiance) +
            " seed=" + std::to_string(generator.spec.seed) + ">";
    return generator.build();
  }
};

void write_run_outputs(const PlantModel& model, const Scenario& scenario,
                       const simulate::RunResult& result, const simulate::RunOptions& options,
                       const std::string& scenario_label, const fs::path& dir) {
  fs::create_directories(dir);
  simulate::write_steps_csv(result.records, (dir / "steps.csv").string());
  simulate::write_summary_json(result.summary, options, scenario_label,
                               (dir / "summary.json").string());

  bounds::ConvexityConstants constants;
  try {
    constants = bounds::estimate_constants(
        model, scenario, bounds::visited_hulls(result.records, result.x0), result.records);
  } catch (const std::invalid_argument& e) {
    // a run that never leaves the per-step optimum has no region to estimate over
    simulate::write_bound_report_json({1, 1, 0, 0, 0}, {},
                                      std::string("constants not estimable: ") + e.what(),
                                      (dir / "bounds.json").string());
    return;
  }
  const bool unconstrained =
      std::all_of(result.records.begin(), result.records.end(),
                  [](const StepRecord& r) { return r.mode == Mode::Mppt; });

  bounds::BoundReport report;
  std::string note;
  std::vector<FeasibleSet> domains;
  domains.reserve(result.records.size());
  for (const StepRecord& record : result.records) domains.push_back(record.set);
  if (unconstrained) {
    report = bounds::check_unconstrained_bounds(result.records, constants);
    const auto variability = bounds::check_variability_bound(model, scenario, domains, constants);
    report.checks.insert(report.checks.end(), variability.checks.begin(),
                         variability.checks.end());
  } else {
    note = "constrained run: stationarity-based inequality checks not applicable";
  }
  simulate::write_bound_report_json(constants, report, note,
                                    (dir / "bounds.json").string());
}

int cmd_generate(const GeneratorFlags& flags, const std::string& out_path) {
  save_scenario(flags.build(), out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_run(const SheetFlags& sheet, const ScenarioSource& source,
            const std::string& tracker_name, const trackers::StepConfig& config,
            bool alpha_optimal, const std::string& out_dir) {
  const PlantModel model = sheet.plant();
  std::string label;
  const Scenario scenario = source.resolve(label);

  simulate::RunOptions options;
  options.tracker = simulate::tracker_from_name(tracker_name);
  options.config = config;

  simulate::RunResult result;
  if (alpha_optimal && options.tracker == simulate::TrackerKind::Opgd) {
    auto optimal = simulate::run_opgd_bound_optimal(model, scenario, options);
    options.config.opgd_step_size = optimal.alpha;
    result = std::move(optimal.run);
    std::cout << "bound-optimal alpha = " << optimal.alpha << " (" << optimal.iterations
              << " iterations)\n";
  } else {
    result = simulate::run_tracker(model, scenario, options);
  }

  write_run_outputs(model, scenario, result, options, label, out_dir);
  const RunSummary& s = result.summary;
  std::cout << s.tracker << ": avg dynamic regret " << s.avg_dynamic_regret_w
            << " W, static regret " << s.static_regret_w << " W, final tracking error "
            << s.final_tracking_error_v << " V\n";
  return 0;
}

int cmd_compare(const SheetFlags& sheet, const ScenarioSource& source,
                const std::string& trackers_csv, const trackers::StepConfig& config,
                const std::string& out_dir) {
  const PlantModel model = sheet.plant();
  std::string label;
  const Scenario scenario = source.resolve(label);

  std::vector<std::string> names;
  std::stringstream stream(trackers_csv);
  for (std::string item; std::getline(stream, item, ',');)
    if (!item.empty()) names.push_back(item);
  if (names.empty()) throw std::invalid_argument("compare: no trackers given");

  fs::create_directories(out_dir);
  std::vector<RunSummary> summaries;
  for (const std::string& name : names) {
    simulate::RunOptions options;
    options.tracker = simulate::tracker_from_name(name);
    options.config = config;
    const auto result = simulate::run_tracker(model, scenario, options);
    write_run_outputs(model, scenario, result, options, label, fs::path(out_dir) / name);
    summaries.push_back(result.summary);
  }

  std::ostringstream table;
  table << "tracker    avg_dynamic_regret_w  static_regret_w  final_tracking_error_v\n";
  std::ofstream csv(fs::path(out_dir) / "comparison.csv");
  csv << "tracker,avg_dynamic_regret_w,static_regret_w,final_tracking_error_v\n";
  for (const RunSummary& s : summaries) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %21.6f %16.6f %23.9f\n", s.tracker.c_str(),
                  s.avg_dynamic_regret_w, s.static_regret_w, s.final_tracking_error_v);
    table << line;
    csv << s.tracker << ',' << s.avg_dynamic_regret_w << ',' << s.static_regret_w << ','
        << s.final_tracking_error_v << "\n";
  }
  std::ofstream text(fs::path(out_dir) / "comparison.txt");
  text << table.str();
  std::cout << table.str();
  return 0;
}

int cmd_check_bounds(const SheetFlags& sheet, const std::string& run_dir) {
  const fs::path dir(run_dir);
  std::ifstream summary_in(dir / "summary.json");
  if (!summary_in) throw std::runtime_error(run_dir + ": missing summary.json");
  nlohmann::json summary = nlohmann::json::parse(summary_in);

  SheetFlags effective = sheet;
  effective.modules = summary.at("modules").get<int>();
  const PlantModel model = effective.plant();

  const std::string scenario_path = summary.at("scenario_csv").get<std::string>();
  if (scenario_path.rfind("<generated", 0) == 0)
    throw std::runtime_error("check-bounds: run used an inline generated scenario; "
                             "re-run with --scenario pointing at a saved CSV");
  const Scenario scenario = load_scenario(scenario_path);

  simulate::RunOptions options;
  options.tracker = simulate::tracker_from_name(summary.at("tracker").get<std::string>());
  options.config.opgd_step_size = summary.at("config").at("alpha").get<Scalar>();
  options.config.po_perturb = summary.at("config").at("perturb").get<Scalar>();
  options.config.constant_setpoint = summary.at("config").at("setpoint").get<Scalar>();
  options.initial_voltage = summary.at("config").at("initial_voltage").get<Scalar>();

  const auto result = simulate::run_tracker(model, scenario, options);

  // The stored log must match the deterministic replay.
  const auto logged = simulate::read_steps_csv((dir / "steps.csv").string());
  if (logged.size() != result.records.size())
    throw std::runtime_error("check-bounds: steps.csv horizon mismatch");
  for (size_t i = 0; i < logged.size(); ++i)
    if (std::abs(logged[i].phi_w - result.records[i].phi()) > 1e-9)
      throw std::runtime_error("check-bounds: steps.csv disagrees with replay at step " +
                               std::to_string(logged[i].t));

  write_run_outputs(model, scenario, result, options, scenario_path, dir);

  std::ifstream report_in(dir / "bounds.json");
  nlohmann::json report = nlohmann::json::parse(report_in);
  for (const auto& check : report.at("checks"))
    std::cout << (check.at("pass").get<bool>() ? "PASS " : "FAIL ")
              << check.at("name").get<std::string>() << "  worst ratio "
              << check.at("worst_ratio").get<double>() << "\n";
  if (report.contains("note")) std::cout << report.at("note").get<std::string>() << "\n";
  return 0;
}

int cmd_plot_script(const std::string& run_dir, const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
  out << "#!/usr/bin/env python3\n"
         "import csv, os\n"
         "import matplotlib\n"
         "matplotlib.use('Agg')\n"
         "import matplotlib.pyplot as plt\n"
         "\n"
         "run_dir = " << nlohmann::json(run_dir).dump() << "\n"
      << "t, err, phi = [], [], []\n"
         "with open(os.path.join(run_dir, 'steps.csv')) as fh:\n"
         "    for row in csv.DictReader(fh):\n"
         "        t.append(int(row['t']))\n"
         "        err.append(abs(float(row['x']) - float(row['x_star'])))\n"
         "        phi.append(float(row['phi_w']))\n"
         "\n"
         "for name, series, ylabel in [('tracking_error', err, 'tracking error [V]'),\n"
         "                             ('instantaneous_regret', phi, 'phi_t [W]')]:\n"
         "    plt.figure(figsize=(8, 3))\n"
         "    plt.plot(t, series, lw=0.8)\n"
         "    plt.xlabel('step t')\n"
         "    plt.ylabel(ylabel)\n"
         "    plt.tight_layout()\n"
         "    plt.savefig(os.path.join(run_dir, name + '.png'), dpi=150)\n"
         "print('plots written to', run_dir)\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, const char* const* argv) {
  CLI::App app{"Grid-constrained PV power-point tracking simulator"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "Write a fluctuating scenario CSV");
  GeneratorFlags gen_flags;
  std::string gen_out;
  gen_flags.attach(generate);
  generate->add_option("--out", gen_out, "Output CSV path")->required();

  // run
  auto* run = app.add_subcommand("run", "Simulate one tracker over a scenario");
  SheetFlags run_sheet;
  ScenarioSource run_source;
  trackers::StepConfig run_config;
  std::string run_tracker_name = "opgd", run_out = "run_out";
  bool run_alpha_optimal = false;
  run_sheet.attach(run);
  run_source.attach(run);
  run->add_option("--tracker", run_tracker_name, "opgd|po|constant|oracle");
  run->add_option("--alpha", run_config.opgd_step_size, "OPGD step size");
  run->add_flag("--alpha-optimal", run_alpha_optimal, "Use alpha = 2/(L+mu) (fixed point)");
  run->add_option("--perturb", run_config.po_perturb, "P&O perturbation [V]");
  run->add_option("--setpoint", run_config.constant_setpoint, "Constant-voltage setpoint [V]");
  run->add_option("--out", run_out, "Output directory");

  // compare
  auto* compare = app.add_subcommand("compare", "Run several trackers on one scenario");
  SheetFlags cmp_sheet;
  ScenarioSource cmp_source;
  trackers::StepConfig cmp_config;
  std::string cmp_trackers = "opgd,po,constant", cmp_out = "compare_out";
  cmp_sheet.attach(compare);
  cmp_source.attach(compare);
  compare->add_option("--trackers", cmp_trackers, "Comma-separated tracker list");
  compare->add_option("--alpha", cmp_config.opgd_step_size, "OPGD step size");
  compare->add_option("--perturb", cmp_config.po_perturb, "P&O perturbation [V]");
  compare->add_option("--setpoint", cmp_config.constant_setpoint, "Constant-voltage setpoint [V]");
  compare->add_option("--out", cmp_out, "Output directory");

  // check-bounds
  auto* check = app.add_subcommand("check-bounds", "Re-verify the bound report of a run");
  SheetFlags check_sheet;
  std::string check_dir;
  check_sheet.attach(check);
  check->add_option("--run-dir", check_dir, "Directory written by `run`")->required();

  // plot-script
  auto* plot = app.add_subcommand("plot-script", "Emit a matplotlib script for a run");
  std::string plot_dir, plot_out = "plot_run.py";
  plot->add_option("--run-dir", plot_dir, "Directory written by `run`")->required();
  plot->add_option("--out", plot_out, "Script path");

  try {
    app.parse(argc, argv);
    if (generate->parsed()) return cmd_generate(gen_flags, gen_out);
    if (run->parsed())
      return cmd_run(run_sheet, run_source, run_tracker_name, run_config, run_alpha_optimal,
                     run_out);
    if (compare->parsed())
      return cmd_compare(cmp_sheet, cmp_source, cmp_trackers, cmp_config, cmp_out);
    if (check->parsed()) return cmd_check_bounds(check_sheet, check_dir);
    if (plot->parsed()) return cmd_plot_script(plot_dir, plot_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pvtrack::cli
