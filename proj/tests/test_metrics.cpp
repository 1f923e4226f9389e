#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pvtrack/metrics.hpp"

using namespace pvtrack;

namespace {

PlantModel table2(int modules = 1) { return make_plant(ModuleDatasheet{}, modules); }

StepRecord record_for(const PlantModel& model, const Environment& env, const FeasibleSet& set,
                      const Vector& x, long t = 0) {
  StepRecord record;
  record.t = t;
  record.x = x;
  record.x_star = constrained_oracle(model, env, set);
  record.f_x = array_cost(model, env, x);
  record.f_star = array_cost(model, env, record.x_star);
  record.power_w = -record.f_x;
  record.set = set;
  return record;
}

}  // namespace

TEST_CASE("oracle over the full interval is the MPP voltage") {
  const PlantModel model = table2(8);
  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 8);
  const Vector x_star = constrained_oracle(model, stc(), set);
  CHECK(x_star[0] == mpp_oracle(model, stc()).voltage);
  CHECK(x_star.minCoeff() == x_star.maxCoeff());
}

TEST_CASE("oracle clamps to the near interval end") {
  const PlantModel model = table2();
  const FeasibleSet set = uniform_box(31.0, voc_at(model, stc()), 1);
  CHECK(constrained_oracle(model, stc(), set)[0] == 31.0);
}

TEST_CASE("oracle matches the grid argmin on random intervals") {
  const PlantModel model = table2();
  std::mt19937 rng(4242);
  std::uniform_real_distribution<Scalar> g_dist(100, 1200), u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const Environment env{g_dist(rng), kStcTemperature};
    const Scalar voc = voc_at(model, env);
    const Scalar a = u(rng) * voc, b = u(rng) * voc;
    const FeasibleSet set = uniform_box(std::min(a, b), std::max(a, b), 1);
    const Scalar grid = oracles::grid_argmin(
        [&](double v) { return cost(model, env, v); }, set.lower[0], set.upper[0], 1e-3);
    CHECK(std::abs(constrained_oracle(model, env, set)[0] - grid) <= 1e-3);
  }
}

TEST_CASE("tracking error is the euclidean norm") {
  Vector a(1), b(1);
  a << 29.2;
  b << 29.0;
  CHECK(tracking_error(a, a) == 0.0);
  CHECK(tracking_error(a, b) == doctest::Approx(0.2).epsilon(1e-12));

  const Vector x = Vector::Constant(8, 30.0);
  const Vector y = Vector::Constant(8, 29.9);
  CHECK(tracking_error(x, y) == doctest::Approx(0.1 * std::sqrt(8.0)).epsilon(1e-12));

  Vector short_vec(2);
  short_vec << 1, 2;
  CHECK_THROWS_AS(tracking_error(a, short_vec), std::invalid_argument);
}

TEST_CASE("instantaneous regret equals the recomputed power gap") {
  const PlantModel model = table2(4);
  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 4);
  CHECK(instantaneous_regret(5.0, 5.0) == 0.0);

  std::mt19937 rng(11);
  std::uniform_real_distribution<Scalar> u(0, 1);
  const Vector x_star = constrained_oracle(model, stc(), set);
  for (int trial = 0; trial < 50; ++trial) {
    Vector x(4);
    for (int i = 0; i < 4; ++i) x[i] = u(rng) * set.upper[i];
    const Scalar phi = instantaneous_regret(array_cost(model, stc(), x),
                                            array_cost(model, stc(), x_star));
    const Scalar gap = array_power(model, stc(), x_star) - array_power(model, stc(), x);
    CHECK(phi == doctest::Approx(gap).epsilon(1e-12));
    CHECK(phi >= -1e-9);
  }
}

TEST_CASE("oracle trajectory has zero dynamic regret") {
  const PlantModel model = table2(2);
  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 2);
  std::vector<StepRecord> records, comparator;
  for (long t = 0; t < 5; ++t) {
    const Vector x_star = constrained_oracle(model, stc(), set);
    records.push_back(record_for(model, stc(), set, x_star, t));
    comparator.push_back(record_for(model, stc(), set, Vector::Constant(2, 29.0), t));
  }
  const RunSummary summary = summarize(records, comparator, 0.1, "oracle", 2);
  CHECK(summary.avg_dynamic_regret_w == 0.0);
  CHECK(summary.final_tracking_error_v == 0.0);
}

TEST_CASE("comparator measured against itself has zero static regret") {
  const PlantModel model = table2(2);
  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 2);
  std::vector<StepRecord> records;
  for (long t = 0; t < 4; ++t)
    records.push_back(record_for(model, stc(), set, Vector::Constant(2, 29.0), t));
  const RunSummary summary = summarize(records, records, 0.1, "constant", 2);
  CHECK(summary.static_regret_w == 0.0);
}

TEST_CASE("summary aggregates match a direct recomputation") {
  const PlantModel model = table2(3);
  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 3);
  std::vector<StepRecord> records, comparator;
  std::mt19937 rng(8);
  std::uniform_real_distribution<Scalar> u(10, 34);
  for (long t = 0; t < 40; ++t) {
    records.push_back(record_for(model, stc(), set, Vector::Constant(3, u(rng)), t));
    comparator.push_back(record_for(model, stc(), set, Vector::Constant(3, 29.0), t));
  }
  const RunSummary summary = summarize(records, comparator, 0.1, "test", 3);

  Scalar phi_sum = 0;
  for (const StepRecord& r : records) phi_sum += r.phi();
  CHECK(summary.avg_dynamic_regret_w == doctest::Approx(phi_sum / 40.0).epsilon(1e-12));
  CHECK(summary.cumulative_dynamic_regret_w == doctest::Approx(phi_sum).epsilon(1e-12));

  // energy identity: avg regret * T * dt equals the summed per-step energy loss
  const Scalar lhs = summary.avg_dynamic_regret_w * 40.0 * 0.1;
  const Scalar rhs = phi_sum * 0.1;
  CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(Scalar(1), std::abs(rhs)));

  CHECK_THROWS_AS(summarize({}, {}, 0.1, "x", 1), std::invalid_argument);
  CHECK_THROWS_AS(summarize(records, {}, 0.1, "x", 1), std::invalid_argument);
}

TEST_CASE("a pointwise-dominating tracker beats the comparator gap") {
  const PlantModel model = table2(2);
  const FeasibleSet set = uniform_box(0, voc_at(model, stc()), 2);
  std::vector<StepRecord> oracle_records, comparator;
  for (long t = 0; t < 6; ++t) {
    oracle_records.push_back(
        record_for(model, stc(), set, constrained_oracle(model, stc(), set), t));
    comparator.push_back(record_for(model, stc(), set, Vector::Constant(2, 29.0), t));
  }
  for (size_t i = 0; i < oracle_records.size(); ++i)
    CHECK(oracle_records[i].f_x <= comparator[i].f_x);
  const RunSummary summary = summarize(oracle_records, comparator, 0.1, "oracle", 2);
  Scalar comparator_gap = 0;
  for (const StepRecord& r : comparator) comparator_gap += r.phi();
  CHECK(summary.avg_dynamic_regret_w <= comparator_gap / 6.0 + 1e-12);
}
