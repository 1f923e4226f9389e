#include "pvtrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pvtrack {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::Mppt: return "MPPT";
    case Mode::DeltaPower: return "DELTA";
    case Mode::RampRate: return "RAMP";
    case Mode::AbsolutePower: return "ABS";
    case Mode::VoltageMax: return "VMAX";
  }
  throw std::logic_error("unknown mode");
}

Mode mode_from_name(const std::string& name) {
  if (name == "MPPT") return Mode::Mppt;
  if (name == "DELTA") return Mode::DeltaPower;
  if (name == "RAMP") return Mode::RampRate;
  if (name == "ABS") return Mode::AbsolutePower;
  if (name == "VMAX") return Mode::VoltageMax;
  throw std::invalid_argument("unknown mode keyword '" + name + "'");
}

void validate(const ConstraintDirective& directive) {
  const Scalar limit = directive.limit;
  if (!std::isfinite(limit)) throw std::invalid_argument("directive: non-finite limit");
  switch (directive.mode) {
    case Mode::Mppt:
      break;
    case Mode::DeltaPower:
      if (limit < 0) throw std::invalid_argument("directive: DELTA reserve must be >= 0");
      break;
    case Mode::RampRate:
      if (limit <= 0) throw std::invalid_argument("directive: RAMP rate must be > 0");
      break;
    case Mode::AbsolutePower:
    case Mode::VoltageMax:
      if (limit <= 0) throw std::invalid_argument("directive: cap must be > 0");
      break;
  }
}

void validate(const Scenario& scenario) {
  if (!(scenario.step_seconds > 0))
    throw std::invalid_argument("scenario: step_seconds must be > 0");
  if (scenario.samples.empty())
    throw std::invalid_argument("scenario: no samples");
  long prev = -1;
  for (const Sample& s : scenario.samples) {
    if (s.time_index <= prev)
      throw std::invalid_argument("scenario: time indices must be strictly increasing");
    prev = s.time_index;
    validate(s.env);
    validate(s.directive);
  }
}

void validate(const FluctuationSpec& spec) {
  if (!(spec.max_step_change >= 0) || !(spec.base_irradiance >= spec.max_step_change))
    throw std::invalid_argument("fluctuation spec: require base_irradiance >= max_step_change >= 0");
  if (spec.temperature_profile.empty())
    throw std::invalid_argument("fluctuation spec: empty temperature profile");
  for (Scalar k : spec.temperature_profile)
    if (!(k > 0)) throw std::invalid_argument("fluctuation spec: temperatures must be > 0 K");
}

namespace {

constexpr Scalar kWindowSeconds = 2.0;  // horizon of the irradiance change limit
constexpr Scalar kIrradianceCeiling = 1200.0;

// Snap to the 1e-5 grid. Keeps every emitted value within 9 significant
// digits so that save/load is exact.
Scalar snap5(Scalar x) { return std::round(x * 1e5) / 1e5; }

// Largest on-grid magnitude not above |x|, sign preserved.
Scalar snap5_toward_zero(Scalar x) { return std::trunc(x * 1e5) / 1e5; }

Scalar kelvin_on_grid(Scalar kelvin) {
  return snap5(kelvin - kCelsiusOffset) + kCelsiusOffset;
}

}  // namespace

Scenario generate_fluctuating(const FluctuationSpec& spec, long horizon, Scalar step_seconds) {
  validate(spec);
  if (horizon <= 0) throw std::invalid_argument("generate_fluctuating: horizon must be >= 1");
  if (!(step_seconds > 0)) throw std::invalid_argument("generate_fluctuating: step must be > 0");

  std::mt19937 rng(spec.seed);
  std::uniform_real_distribution<Scalar> unit(0.0, 1.0);
  std::uniform_real_distribution<Scalar> sym(-1.0, 1.0);

  Scenario scenario;
  scenario.step_seconds = step_seconds;
  scenario.samples.reserve(static_cast<size_t>(horizon));

  const size_t segments = spec.temperature_profile.size();
  const long window_steps =
      std::max<long>(1, std::lround(kWindowSeconds / step_seconds));
  Scalar g = snap5(std::clamp(spec.base_irradiance, Scalar(0), kIrradianceCeiling));
  Scalar increment = 0;

  for (long t = 0; t < horizon; ++t) {
    if (t % window_steps == 0) {
      // Net change for the coming window: mean reversion plus noise, with an
      // occasional full-scale event. The per-step increment is snapped onto
      // the irradiance grid toward zero so every realized window change
      // stays at or below the limit exactly.
      const Scalar pull = 0.35 * (spec.base_irradiance - g);
      Scalar delta = std::clamp(pull + sym(rng) * spec.max_step_change,
                                -spec.max_step_change, spec.max_step_change);
      if (unit(rng) < 0.2)
        delta = (unit(rng) < 0.5 ? -1.0 : 1.0) * spec.max_step_change;
      increment = snap5_toward_zero(delta / static_cast<Scalar>(window_steps));
    }

    const size_t seg = std::min(segments - 1,
                                static_cast<size_t>(t) * segments / static_cast<size_t>(horizon));
    Sample sample;
    sample.time_index = t;
    sample.env.irradiance = g;
    sample.env.temperature = kelvin_on_grid(spec.temperature_profile[seg]);
    sample.directive = {Mode::Mppt, 0};
    scenario.samples.push_back(sample);

    g = snap5(std::clamp(g + increment, Scalar(0), kIrradianceCeiling));
  }
  validate(scenario);
  return scenario;
}

void apply_mode_cycle(Scenario& scenario, const std::vector<ConstraintDirective>& cycle,
                      long steps_per_mode) {
  if (cycle.empty() || steps_per_mode <= 0)
    throw std::invalid_argument("apply_mode_cycle: empty cycle or nonpositive block length");
  for (const ConstraintDirective& d : cycle) validate(d);
  for (long t = 0; t < scenario.horizon(); ++t) {
    const size_t idx = static_cast<size_t>((t / steps_per_mode) % static_cast<long>(cycle.size()));
    scenario.samples[static_cast<size_t>(t)].directive = cycle[idx];
  }
}

namespace {

std::string fmt9(Scalar x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& path, long line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

Scalar parse_number(const std::string& field, const std::string& path, long line,
                    const char* what) {
  try {
    size_t pos = 0;
    const Scalar value = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    parse_fail(path, line, std::string("invalid ") + what + " '" + field + "'");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

constexpr const char* kHeader = "t,irradiance_wm2,temperature_c,mode,limit";

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");

  Scenario scenario;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  long prev_t = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (line[0] == '#') {
      if (header_seen) parse_fail(path, line_no, "comment after header");
      const auto pos = line.find("dt=");
      if (pos != std::string::npos)
        scenario.step_seconds = parse_number(line.substr(pos + 3), path, line_no, "dt");
      continue;
    }
    if (!header_seen) {
      if (line != kHeader)
        parse_fail(path, line_no, std::string("expected header '") + kHeader + "'");
      header_seen = true;
      continue;
    }

    const auto fields = split_csv(line);
    if (fields.size() != 5)
      parse_fail(path, line_no, "expected 5 columns, got " + std::to_string(fields.size()));

    Sample sample;
    const Scalar t_value = parse_number(fields[0], path, line_no, "time index");
    if (!std::isfinite(t_value) || std::abs(t_value) > 1e15)
      parse_fail(path, line_no, "time index out of range");
    sample.time_index = static_cast<long>(t_value);
    if (static_cast<Scalar>(sample.time_index) != t_value)
      parse_fail(path, line_no, "time index must be an integer");
    if (sample.time_index <= prev_t)
      parse_fail(path, line_no, "time index not strictly increasing");
    prev_t = sample.time_index;

    sample.env.irradiance = parse_number(fields[1], path, line_no, "irradiance");
    sample.env.temperature = parse_number(fields[2], path, line_no, "temperature") + kCelsiusOffset;
    try {
      sample.directive.mode = mode_from_name(fields[3]);
      sample.directive.limit = parse_number(fields[4], path, line_no, "limit");
      if (sample.directive.mode == Mode::Mppt) sample.directive.limit = 0;
      validate(sample.env);
      validate(sample.directive);
    } catch (const std::invalid_argument& e) {
      parse_fail(path, line_no, e.what());
    }
    scenario.samples.push_back(sample);
  }

  if (!header_seen) throw std::runtime_error(path + ": empty file");
  if (scenario.samples.empty()) throw std::runtime_error(path + ": no data rows");
  if (!(scenario.step_seconds > 0)) throw std::runtime_error(path + ": dt must be > 0");
  return scenario;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  validate(scenario);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");

  out << "# dt=" << fmt9(scenario.step_seconds) << "\n" << kHeader << "\n";
  for (const Sample& s : scenario.samples) {
    const Scalar limit = s.directive.mode == Mode::Mppt ? 0 : s.directive.limit;
    out << s.time_index << ',' << fmt9(s.env.irradiance) << ','
        << fmt9(s.env.temperature - kCelsiusOffset) << ',' << mode_name(s.directive.mode)
        << ',' << fmt9(limit) << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace pvtrack
