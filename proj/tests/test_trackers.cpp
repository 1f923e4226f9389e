#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <type_traits>

#include "pvtrack/bounds.hpp"
#include "pvtrack/trackers.hpp"

using namespace pvtrack;
using trackers::StepConfig;
using trackers::TrackerState;

namespace {

PlantModel table2(int modules = 1) { return make_plant(ModuleDatasheet{}, modules); }

bool same(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

TrackerState state_at(Scalar v, int modules = 1, Scalar setpoint = 29.0) {
  return {Vector::Constant(modules, v), std::nullopt, setpoint};
}

}  // namespace

// The P&O step consumes only a scalar power measurement, never a gradient.
static_assert(std::is_invocable_r_v<TrackerState, decltype(trackers::po_step),
                                    const TrackerState&, Scalar, const FeasibleSet&,
                                    const StepConfig&>);

TEST_CASE("opgd fixes interior stationary points and clamps at the bounds") {
  const FeasibleSet set = uniform_box(0, 36.3, 1);
  const StepConfig config;
  const TrackerState state = state_at(20.0);
  CHECK(same(trackers::opgd_step(state, Vector::Zero(1), set, config).x, state.x));

  Vector downhill(1);
  downhill << -1000.0;  // drives x - alpha*grad far above the upper bound
  CHECK(trackers::opgd_step(state, downhill, set, config).x[0] == 36.3);

  Vector bad(1);
  bad << std::numeric_limits<Scalar>::quiet_NaN();
  CHECK_THROWS_AS(trackers::opgd_step(state, bad, set, config), std::invalid_argument);
}

TEST_CASE("opgd converges on a static environment from 20 V") {
  const PlantModel model = table2();
  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 1);
  const Scalar v_star = mpp_oracle(model, stc()).voltage;
  StepConfig config;
  config.opgd_step_size = 0.2;

  TrackerState state = state_at(20.0);
  Scalar prev_error = std::abs(state.x[0] - v_star);
  for (int t = 0; t < 200; ++t) {
    state = trackers::opgd_step(state, cost_gradient(model, stc(), state.x), set, config);
    const Scalar error = std::abs(state.x[0] - v_star);
    if (prev_error > 1e-9) CHECK(error < prev_error);
    prev_error = error;
  }
  CHECK(prev_error < 0.05);
}

TEST_CASE("opgd contracts at the bound-optimal step size") {
  const PlantModel model = table2();
  const Scalar v_star = mpp_oracle(model, stc()).voltage;
  const Scalar x0 = 0.8 * voc_at(model, stc());
  const Scalar e0 = std::abs(x0 - v_star);

  Scenario pilot;
  pilot.samples.push_back({0, stc(), {Mode::Mppt, 0}});
  StepRecord seed;
  seed.x = Vector::Constant(1, x0);
  seed.x_star = Vector::Constant(1, v_star);
  const auto constants = bounds::estimate_constants(
      model, pilot, {FeasibleSet{Vector::Constant(1, v_star - e0), Vector::Constant(1, v_star + e0)}},
      {seed});

  StepConfig config;
  config.opgd_step_size = 2.0 / (constants.lipschitz_l + constants.mu);
  const Scalar q = (constants.lipschitz_l - constants.mu) /
                   (constants.lipschitz_l + constants.mu);

  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 1);
  TrackerState state = state_at(x0);
  Scalar error = e0;
  for (int t = 0; t < 60; ++t) {
    state = trackers::opgd_step(state, cost_gradient(model, stc(), state.x), set, config);
    const Scalar next_error = std::abs(state.x[0] - v_star);
    if (error > 1e-12) CHECK(next_error <= (q + 1e-9) * error);
    error = next_error;
  }
  CHECK(error < 1e-9);
}

TEST_CASE("po keeps direction on rising power and reverses on a drop") {
  const FeasibleSet set = uniform_box(0, 36.3, 1);
  const StepConfig config;

  TrackerState state = state_at(20.0);
  state = trackers::po_step(state, 100.0, set, config);  // first step: +perturb
  CHECK(state.x[0] == doctest::Approx(20.5));
  CHECK(state.po->direction == 1);

  state = trackers::po_step(state, 110.0, set, config);  // rising: keep +
  CHECK(state.x[0] == doctest::Approx(21.0));
  CHECK(state.po->direction == 1);

  state = trackers::po_step(state, 105.0, set, config);  // drop: reverse
  CHECK(state.x[0] == doctest::Approx(20.5));
  CHECK(state.po->direction == -1);
}

TEST_CASE("po oscillates inside twice the perturbation around the MPP") {
  const PlantModel model = table2();
  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 1);
  const Scalar v_star = mpp_oracle(model, stc()).voltage;
  const StepConfig config;

  TrackerState state = state_at(20.0);
  for (int t = 0; t < 200; ++t) {
    state = trackers::po_step(state, power(model, stc(), state.x[0]), set, config);
    if (t >= 150) CHECK(std::abs(state.x[0] - v_star) <= 2 * config.po_perturb + 1e-9);
  }
}

TEST_CASE("constant voltage holds the setpoint and honors active caps") {
  const TrackerState state = state_at(10.0, 1, 29.0);
  CHECK(trackers::constant_voltage_step(state, uniform_box(0, 36.3, 1)).x[0] == 29.0);
  CHECK(trackers::constant_voltage_step(state, uniform_box(0, 27.0, 1)).x[0] == 27.0);

  TrackerState wandering = state;
  for (int t = 0; t < 10; ++t) {
    wandering = trackers::constant_voltage_step(wandering, uniform_box(0, 36.3, 1));
    CHECK(wandering.x[0] == 29.0);
  }
}

TEST_CASE("duty cycle is the clamped voltage ratio") {
  CHECK(trackers::duty_cycle(29.2, 58.4) == doctest::Approx(0.5));
  CHECK(trackers::duty_cycle(40.0, 36.0) == 1.0);
  CHECK(trackers::duty_cycle(0.0, 48.0) == 0.0);
  CHECK_THROWS_AS(trackers::duty_cycle(29.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(trackers::duty_cycle(std::numeric_limits<Scalar>::quiet_NaN(), 48.0),
                  std::invalid_argument);
}

TEST_CASE("vector opgd equals independent scalar runs") {
  const PlantModel array_model = table2(8);
  const PlantModel unit_model = table2(1);
  const StepConfig config;
  const FeasibleSet array_set = uniform_box(0, voc_at(array_model, stc()), 8);
  const FeasibleSet unit_set = uniform_box(0, voc_at(unit_model, stc()), 1);

  TrackerState array_state = state_at(20.0, 8);
  TrackerState unit_state = state_at(20.0, 1);
  for (int t = 0; t < 50; ++t) {
    array_state = trackers::opgd_step(
        array_state, cost_gradient(array_model, stc(), array_state.x), array_set, config);
    unit_state = trackers::opgd_step(
        unit_state, cost_gradient(unit_model, stc(), unit_state.x), unit_set, config);
    for (int i = 0; i < 8; ++i) CHECK(array_state.x[i] == unit_state.x[0]);
  }
}

TEST_CASE("every step lands inside the feasible set") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<Scalar> bound(0, 36), grad(-50, 50), v0(0, 36);
  const StepConfig config;
  for (int trial = 0; trial < 200; ++trial) {
    const Scalar a = bound(rng), b = bound(rng);
    const FeasibleSet set = uniform_box(std::min(a, b), std::max(a, b), 2);
    TrackerState state = state_at(v0(rng), 2);
    Vector g(2);
    g << grad(rng), grad(rng);
    CHECK(set.contains(trackers::opgd_step(state, g, set, config).x));
    CHECK(set.contains(trackers::po_step(state, 100.0, set, config).x));
    CHECK(set.contains(trackers::constant_voltage_step(state, set).x));
  }
}
