#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ramplight/common.hpp"
#include "ramplight/control.hpp"
#include "ramplight/rng.hpp"

using namespace ramplight;

namespace {

IrradianceSeries make_series(std::vector<double> values, double dt = 1.0) {
  IrradianceSeries s;
  s.dt = dt;
  s.values = std::move(values);
  return s;
}

IrradianceSeries random_series(Rng& rng, int len, double peak = 1000.0, double dt = 7.0) {
  IrradianceSeries s;
  s.dt = dt;
  s.values.resize(len);
  double level = rng.uniform(0.0, peak);
  for (int t = 0; t < len; ++t) {
    // occasional jumps, otherwise a bounded walk: exercises both the chase
    // and ride-through regimes of the controllers
    if (rng.bernoulli(0.05)) level = rng.uniform(0.0, peak);
    level = std::clamp(level + rng.gaussian(10.0), 0.0, peak);
    s.values[t] = level;
  }
  return s;
}

const RampSpec kUnitRamp{2.0 / 3.0, 1.0};   // r = 2/3
const RampSpec kPaperRamp{2.0 / 3.0, 7.0};  // r = 14/3

}  // namespace

TEST_CASE("reach_interval basics") {
  const Interval a = reach_interval(100.0, kPaperRamp);
  CHECK(a.lo == doctest::Approx(100.0 - 14.0 / 3.0).epsilon(1e-12));
  CHECK(a.hi == doctest::Approx(100.0 + 14.0 / 3.0).epsilon(1e-12));

  const Interval b = reach_interval(2.0, kPaperRamp);
  CHECK(b.lo == 0.0);  // floored at zero
  CHECK(b.hi == doctest::Approx(2.0 + 14.0 / 3.0));

  const Interval c = reach_interval(0.0, RampSpec{0.1, 1.0});
  CHECK(c.lo == 0.0);
  CHECK(c.hi == doctest::Approx(0.1));
}

TEST_CASE("baseline_step clamps to the reach interval") {
  CHECK(baseline_step(100.0, 100.5, kPaperRamp) == doctest::Approx(100.5));
  CHECK(baseline_step(100.0, 200.0, kPaperRamp) == doctest::Approx(100.0 + 14.0 / 3.0));
  CHECK(baseline_step(100.0, 0.0, kPaperRamp) == doctest::Approx(100.0 - 14.0 / 3.0));
}

TEST_CASE("baseline_step is the projection onto the reach interval") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    const double u_prev = rng.uniform(0.0, 500.0);
    const double s_t = rng.uniform(0.0, 500.0);
    const double proj = baseline_step(u_prev, s_t, kPaperRamp);
    const Interval reach = reach_interval(u_prev, kPaperRamp);
    for (int k = 0; k <= 10; ++k) {
      const double x = reach.lo + k * (reach.hi - reach.lo) / 10.0;
      CHECK(std::abs(proj - s_t) <= std::abs(x - s_t) + 1e-12);
    }
  }
}

TEST_CASE("apply_action semantics") {
  CHECK(apply_action(100.0, 100.0, Action::Up, kPaperRamp) ==
        doctest::Approx(100.0 + 14.0 / 3.0));
  CHECK(apply_action(100.0, 100.0, Action::Down, kPaperRamp) ==
        doctest::Approx(100.0 - 14.0 / 3.0));
  CHECK(apply_action(3.0, 50.0, Action::Down, kPaperRamp) == 0.0);  // zero floor

  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const double u_prev = rng.uniform(0.0, 300.0);
    const double s_t = rng.uniform(0.0, 300.0);
    CHECK(apply_action(u_prev, s_t, Action::Track, kPaperRamp) ==
          baseline_step(u_prev, s_t, kPaperRamp));
  }
}

TEST_CASE("baseline_rollout frozen examples") {
  SUBCASE("max-rate chase") {
    const auto s = make_series({0.0, 10.0, 10.0});
    const Trajectory traj = baseline_rollout(s, 0.0, kUnitRamp);
    REQUIRE(traj.u.size() == 3);
    CHECK(traj.u[0] == 0.0);
    CHECK(traj.u[1] == doctest::Approx(2.0 / 3.0));
    CHECK(traj.u[2] == doctest::Approx(4.0 / 3.0));
  }
  SUBCASE("constant input is tracked exactly") {
    const auto s = make_series({50.0, 50.0, 50.0, 50.0});
    const Trajectory traj = baseline_rollout(s, 50.0, kUnitRamp);
    for (double u : traj.u) CHECK(u == 50.0);
  }
  SUBCASE("one-step dip chased then recovered") {
    const auto s = make_series({100.0, 100.0, 0.0, 100.0});
    const Trajectory traj = baseline_rollout(s, 100.0, kUnitRamp);
    CHECK(traj.u[0] == 100.0);
    CHECK(traj.u[1] == 100.0);
    CHECK(traj.u[2] == doctest::Approx(100.0 - 2.0 / 3.0));
    CHECK(traj.u[3] == 100.0);
  }
}

TEST_CASE("throughput") {
  const std::vector<double> s = {1.0, 2.0, 3.0};
  const std::vector<double> u = {2.0, 1.0, 5.0};  // diffs 1, -1, 2
  CHECK(throughput(s, u, 7.0) == doctest::Approx(28.0));
  CHECK(throughput(s, s, 7.0) == 0.0);
  CHECK_THROWS_AS(throughput(s, std::vector<double>{1.0}, 1.0), NumericError);

  const auto series = make_series({0.0, 10.0, 10.0});
  const Trajectory base = baseline_rollout(series, 0.0, kUnitRamp);
  CHECK(throughput(series.values, base.u, 1.0) == doctest::Approx(18.0));
}

TEST_CASE("label_action") {
  const double r = kPaperRamp.step();
  CHECK(label_action(100.0, 100.0, 100.0, kPaperRamp) == Action::Track);
  CHECK(label_action(100.0 + r, 100.0, 100.0, kPaperRamp) == Action::Up);
  CHECK(label_action(100.0 - r, 100.0, 100.0 + 5.0 * r, kPaperRamp) == Action::Down);
  CHECK_THROWS_AS(label_action(100.0 + 2.0 * r, 100.0, 100.0, kPaperRamp), NumericError);

  // Deterministic and total on feasible inputs.
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double u_prev = rng.uniform(0.0, 200.0);
    const Interval reach = reach_interval(u_prev, kPaperRamp);
    const double u_star = rng.uniform(reach.lo, reach.hi);
    const double s_t = rng.uniform(0.0, 200.0);
    const Action a = label_action(u_star, u_prev, s_t, kPaperRamp);
    CHECK(label_action(u_star, u_prev, s_t, kPaperRamp) == a);
  }
}

TEST_CASE("dp_oracle frozen examples") {
  SUBCASE("reachability forces max ramp") {
    const auto s = make_series({0.0, 10.0});
    const Trajectory traj = dp_oracle(s, 0.0, kUnitRamp, 1.0 / 3.0);
    CHECK(tracking_objective(s, traj) == doctest::Approx(28.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("constant series costs nothing on any grid containing it") {
    const auto s = make_series({4.0, 4.0, 4.0, 4.0});
    const Trajectory traj = dp_oracle(s, 4.0, kUnitRamp, 1.0 / 3.0);
    CHECK(tracking_objective(s, traj) == doctest::Approx(0.0));
  }
  SUBCASE("grid must divide the step budget") {
    const auto s = make_series({0.0, 10.0});
    CHECK_THROWS_AS(dp_oracle(s, 0.0, kUnitRamp, 0.25), ConfigError);
  }
}

TEST_CASE("dp_oracle parallel matches the serial reference bitwise") {
  Rng rng(11);
  for (int i = 0; i < 5; ++i) {
    const IrradianceSeries s = random_series(rng, 60);
    const double u0 = s.values.front();
    const Trajectory par = dp_oracle(s, u0, kPaperRamp, kPaperRamp.step() / 8.0);
    const Trajectory ser = dp_oracle_serial(s, u0, kPaperRamp, kPaperRamp.step() / 8.0);
    REQUIRE(par.u.size() == ser.u.size());
    for (std::size_t t = 0; t < par.u.size(); ++t) CHECK(par.u[t] == ser.u[t]);
  }
}

TEST_CASE("hindsight_optimal: constant series") {
  const auto s = make_series({7.0, 7.0, 7.0, 7.0, 7.0});
  const Trajectory traj = hindsight_optimal(s, 7.0, kUnitRamp);
  CHECK(tracking_objective(s, traj) == doctest::Approx(0.0));
  for (double u : traj.u) CHECK(u == doctest::Approx(7.0));
}

TEST_CASE("hindsight_optimal: one-step dip, verified against dp_oracle") {
  // The continuous optimum dips one ramp step into the outage: objective
  // 10 - 2/3 = 28/3. The grid oracle at step 1/3 reaches the same value.
  const auto s = make_series({10.0, 10.0, 10.0, 0.0, 10.0, 10.0, 10.0});
  const Trajectory opt = hindsight_optimal(s, 10.0, kUnitRamp);
  const Trajectory oracle = dp_oracle(s, 10.0, kUnitRamp, 1.0 / 3.0);
  const double j_opt = tracking_objective(s, opt);
  const double j_oracle = tracking_objective(s, oracle);
  CHECK(j_oracle == doctest::Approx(28.0 / 3.0).epsilon(1e-9));
  CHECK(j_opt == doctest::Approx(j_oracle).epsilon(1e-9));
  CHECK(opt.ramp_feasible(kUnitRamp));
}

TEST_CASE("hindsight_optimal anticipates a long dip") {
  // 100 -> 0 for 30 steps -> 100 again; the optimum starts descending
  // strictly before the dip arrives.
  std::vector<double> v(70, 100.0);
  for (int t = 10; t < 40; ++t) v[t] = 0.0;
  const auto s = make_series(std::move(v));
  const Trajectory opt = hindsight_optimal(s, 100.0, kUnitRamp);
  CHECK(opt.u[9] < 100.0);
  bool decreasing_before_dip = false;
  for (int t = 1; t < 10; ++t)
    if (opt.u[t] < opt.u[t - 1] - 1e-12) decreasing_before_dip = true;
  CHECK(decreasing_before_dip);

  const Trajectory base = baseline_rollout(s, 100.0, kUnitRamp);
  CHECK(tracking_objective(s, opt) < tracking_objective(s, base));
}

TEST_CASE("oracle sandwich and dominance on random episodes") {
  Rng rng(2024);
  for (int i = 0; i < 20; ++i) {
    const IrradianceSeries s = random_series(rng, 50);
    const double u0 = s.values.front();
    const double grid = kPaperRamp.step() / 8.0;

    const Trajectory opt = hindsight_optimal(s, u0, kPaperRamp);
    const Trajectory oracle = dp_oracle(s, u0, kPaperRamp, grid);
    const Trajectory base = baseline_rollout(s, u0, kPaperRamp);

    const double j_opt = tracking_objective(s, opt);
    const double j_oracle = tracking_objective(s, oracle);
    const double j_base = tracking_objective(s, base);

    CHECK(opt.ramp_feasible(kPaperRamp));
    CHECK(oracle.ramp_feasible(kPaperRamp));
    CHECK(base.ramp_feasible(kPaperRamp));

    // Quantization can only hurt, and by at most one grid cell per step.
    CHECK(j_opt <= j_oracle + 1e-9);
    CHECK(j_oracle <= j_opt + s.size() * grid + 1e-9);
    // The baseline is feasible for the same problem, so it cannot beat the
    // optimum.
    CHECK(j_opt <= j_base + 1e-9);
  }
}

TEST_CASE("hindsight_optimal_from") {
  Rng rng(5);
  const IrradianceSeries s = random_series(rng, 40);
  const double u0 = s.values.front();

  SUBCASE("t_start 0 reproduces the full solution") {
    const Trajectory full = hindsight_optimal(s, u0, kPaperRamp);
    const Trajectory from = hindsight_optimal_from(s, 0, u0, kPaperRamp);
    REQUIRE(full.u.size() == from.u.size());
    for (std::size_t t = 0; t < full.u.size(); ++t) CHECK(full.u[t] == from.u[t]);
  }

  SUBCASE("length-1 suffix is the projection") {
    const double u_prev = 123.0;
    const Trajectory tail = hindsight_optimal_from(s, s.size() - 1, u_prev, kPaperRamp);
    REQUIRE(tail.u.size() == 1);
    CHECK(tail.u[0] ==
          doctest::Approx(baseline_step(u_prev, s.values.back(), kPaperRamp)));
  }

  SUBCASE("mid-episode state beats manual suffixes and matches the oracle") {
    const int t0 = 17;
    const double u_prev = 0.5 * s.values[t0];  // off the optimal trajectory
    const Trajectory suffix = hindsight_optimal_from(s, t0, u_prev, kPaperRamp);

    IrradianceSeries tail;
    tail.dt = s.dt;
    tail.values.assign(s.values.begin() + t0, s.values.end());

    const double j_suffix = throughput(tail.values, suffix.u, 1.0);

    // A manually constructed feasible suffix: chase the signal reactively.
    const Trajectory manual = baseline_rollout(tail, u_prev, kPaperRamp);
    CHECK(j_suffix <= throughput(tail.values, manual.u, 1.0) + 1e-9);

    const double grid = kPaperRamp.step() / 8.0;
    const Trajectory oracle = dp_oracle(tail, u_prev, kPaperRamp, grid);
    const double j_oracle = throughput(tail.values, oracle.u, 1.0);
    CHECK(j_suffix <= j_oracle + 1e-9);
    CHECK(j_oracle <= j_suffix + tail.values.size() * grid + 1e-9);
  }
}

TEST_CASE("suffix labeler is consistent with its own recovery") {
  Rng rng(9);
  const IrradianceSeries s = random_series(rng, 30);
  const SuffixOptimalLabeler labeler(s, kPaperRamp);
  const Trajectory traj = labeler.recover(0, s.values.front());
  double u_prev = s.values.front();
  for (int t = 0; t < s.size(); ++t) {
    CHECK(labeler.optimal_output(t, u_prev) == traj.u[t]);
    u_prev = traj.u[t];
  }
}

TEST_CASE("hindsight batch: parallel equals serial") {
  Rng rng(77);
  std::vector<IrradianceSeries> episodes;
  for (int i = 0; i < 8; ++i) episodes.push_back(random_series(rng, 40));
  const auto par = hindsight_optimal_batch(episodes, kPaperRamp);
  const auto ser = hindsight_optimal_batch_serial(episodes, kPaperRamp);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i)
    for (std::size_t t = 0; t < par[i].u.size(); ++t) CHECK(par[i].u[t] == ser[i].u[t]);
}
