#include <gtest/gtest.h>

#include <cmath>

#include "hyzeno/dynamics.hpp"
#include "hyzeno/error.hpp"
#include "hyzeno/simulator.hpp"
#include "hyzeno/system_spec.hpp"
#include "oracles.hpp"

using namespace hyzeno;

namespace {

SystemData make(const std::string& flow_set, const std::string& jump_set, std::vector<std::string> f,
                std::vector<std::string> g) {
  SystemSpec s;
  s.name = "test";
  s.dim = f.size();
  s.flow_set = flow_set;
  s.jump_set = jump_set;
  s.flow_map = std::move(f);
  s.jump_map = std::move(g);
  return compile_system(s);
}

void expect_run_invariants(const SystemData& sys, const ClassicalRun& run) {
  ASSERT_EQ(run.segments.size(), run.jumps.size() + 1);
  EXPECT_TRUE(is_valid_classical_domain(run.domain()));
  EXPECT_NO_THROW((void)run.extended_domain(0));
  for (std::size_t i = 0; i < run.jumps.size(); ++i) {
    const JumpEvent& ev = run.jumps[i];
    EXPECT_EQ(ev.j, i);
    EXPECT_EQ(ev.post, jump(sys, ev.pre)) << "jump " << i;  // bitwise
    EXPECT_EQ(ev.pre, run.segments[i].samples.back().x);
    EXPECT_EQ(ev.post, run.segments[i + 1].samples.front().x);
    EXPECT_EQ(run.segments[i + 1].t_start(), ev.t);
    if (i > 0) { EXPECT_GE(ev.t, run.jumps[i - 1].t); }
  }
  for (const auto& seg : run.segments)
    for (std::size_t s = 1; s < seg.samples.size(); ++s) EXPECT_GT(seg.samples[s].t, seg.samples[s - 1].t);
}

}  // namespace

TEST(Simulator, BallZenoTimeMatchesOracle) {
  const SystemData ball = builtin_scenario("bouncing_ball");
  const ClassicalRun run = simulate(ball, State{1.0, 0.0}, SimConfig{});
  ASSERT_EQ(run.termination, Termination::ZenoDetected);
  ASSERT_TRUE(run.zeno);
  EXPECT_NEAR(run.zeno->tau_hat, oracle::zeno_time(1.0, 0.0, 0.5), 1e-2);
  EXPECT_NEAR(run.zeno->tau_hat, 1.35457, 1e-4);
  EXPECT_NEAR(run.zeno->ratio, 0.5, 1e-3);
  EXPECT_GE(run.jumps.size(), 15u);
  expect_run_invariants(ball, run);
}

// Property: Zeno time tracks the oracle over a grid of restitutions and heights.
TEST(SimulatorProperty, ZenoTimeGrid) {
  for (double lambda : {0.3, 0.5, 0.7}) {
    const SystemData ball = builtin_scenario("bouncing_ball", {lambda, 9.81});
    for (double a : {0.5, 1.0, 3.0}) {
      const ClassicalRun run = simulate(ball, State{a, 0.0}, SimConfig{});
      ASSERT_EQ(run.termination, Termination::ZenoDetected) << lambda << " " << a;
      EXPECT_NEAR(run.zeno->tau_hat, oracle::zeno_time(a, 0.0, lambda), 1e-2) << lambda << " " << a;
      expect_run_invariants(ball, run);
    }
  }
}

TEST(Simulator, NonzeroInitialVelocity) {
  const SystemData ball = builtin_scenario("bouncing_ball", {0.6, 9.81});
  const ClassicalRun run = simulate(ball, State{0.7, 2.5}, SimConfig{});
  ASSERT_EQ(run.termination, Termination::ZenoDetected);
  EXPECT_NEAR(run.zeno->tau_hat, oracle::zeno_time(0.7, 2.5, 0.6), 1e-2);
  EXPECT_NEAR(oracle::zeno_time(0.7, 2.5, 0.6), oracle::recursion_closed_form_tau(0.7, 2.5, 0.6), 1e-9);
}

TEST(Simulator, GuardLocalization) {
  const SystemData ball = builtin_scenario("bouncing_ball");
  const ClassicalRun run = simulate(ball, State{3.0, 0.0}, SimConfig{});
  ASSERT_FALSE(run.jumps.empty());
  for (const auto& ev : run.jumps) {
    EXPECT_LE(std::fabs(ev.pre[0]), 1e-8);
    EXPECT_LT(ev.pre[1], 0.0);
  }
}

TEST(Simulator, BallisticSegmentsMatchParabola) {
  const SystemData ball = builtin_scenario("bouncing_ball");
  const ClassicalRun run = simulate(ball, State{2.0, 1.0}, SimConfig{});
  const double g = 9.81;
  for (const auto& seg : run.segments) {
    const double t0 = seg.t_start();
    const double h0 = seg.samples.front().x[0];
    const double v0 = seg.samples.front().x[1];
    for (const auto& s : seg.samples) {
      const double dt = s.t - t0;
      EXPECT_NEAR(s.x[0], h0 + v0 * dt - 0.5 * g * dt * dt, 1e-6);
      EXPECT_NEAR(s.x[1], v0 - g * dt, 1e-6);
    }
  }
}

TEST(Simulator, ImpactTimesMatchOracle) {
  const SystemData ball = builtin_scenario("bouncing_ball");
  const ClassicalRun run = simulate(ball, State{1.0, 0.0}, SimConfig{});
  const auto oracle_times = oracle::impact_times(1.0, 0.0, 0.5);
  // Each localisation may be off by one bisection window, and the offset carries into later flights.
  const double window = SimConfig{}.event_tol;
  for (std::size_t i = 0; i < run.jumps.size(); ++i)
    EXPECT_NEAR(run.jumps[i].t, oracle_times[i], 2.0 * static_cast<double>(i + 1) * window) << "impact " << i;
}

TEST(Simulator, RestingBallFlowsToHorizon) {
  const SystemData ball = builtin_scenario("bouncing_ball");
  SimConfig cfg;
  cfg.horizon = 2.0;
  const ClassicalRun run = simulate(ball, State{0.0, 0.0}, cfg);
  EXPECT_EQ(run.termination, Termination::Horizon);
  EXPECT_TRUE(run.jumps.empty());
  EXPECT_EQ(run.final_time(), 2.0);
  EXPECT_EQ(run.final_state(), (State{0.0, 0.0}));
}

TEST(Simulator, TwoBallsFreezeAwayFromOrigin) {
  const SystemData sys = builtin_scenario("two_balls");
  const ClassicalRun run = simulate(sys, State{3.0, 0.0, 1.0, 0.0}, SimConfig{});
  ASSERT_EQ(run.termination, Termination::ZenoDetected);
  EXPECT_NEAR(run.zeno->tau_hat, oracle::zeno_time(1.0, 0.0, 0.5), 1e-2);
  const auto red = oracle::ball_at(3.0, 0.0, 0.5, run.final_time());
  EXPECT_NEAR(run.final_state()[0], red.h, 1e-6);
  EXPECT_NEAR(run.final_state()[1], red.v, 1e-6);
  EXPECT_GE(std::hypot(run.final_state()[0], run.final_state()[1]), 0.5);
  expect_run_invariants(sys, run);
}

TEST(Simulator, MaxJumpsIsNotZeno) {
  const SystemData ball = builtin_scenario("bouncing_ball");
  SimConfig cfg;
  cfg.max_jumps = 5;
  const ClassicalRun run = simulate(ball, State{1.0, 0.0}, cfg);
  EXPECT_EQ(run.termination, Termination::MaxJumps);
  EXPECT_FALSE(run.zeno);
  EXPECT_EQ(run.jumps.size(), 5u);
}

TEST(Simulator, DeadlockWhenFlowLeavesC) {
  const SystemData sys = make("x1 <= 1", "x1 > 5", {"1"}, {"x1"});
  const ClassicalRun run = simulate(sys, State{0.0}, SimConfig{});
  EXPECT_EQ(run.termination, Termination::Deadlock);
  EXPECT_NEAR(run.final_time(), 1.0, 1e-6);
}

TEST(Simulator, DeadlockAfterJumpOutsideCAndD) {
  const SystemData sys = make("x1 >= 0 && x1 < 1", "x1 >= 1 && x1 < 1.5", {"1"}, {"x1 + 5"});
  const ClassicalRun run = simulate(sys, State{0.5}, SimConfig{});
  EXPECT_EQ(run.termination, Termination::Deadlock);
  EXPECT_EQ(run.jumps.size(), 1u);
}

TEST(Simulator, EvaluationErrorsEndTheRun) {
  const SystemData domain = make("x1 > -100", "x1 < -200", {"1", "sqrt(1 - x1)"}, {"x1", "x2"});
  const ClassicalRun r1 = simulate(domain, State{0.0, 0.0}, SimConfig{});
  EXPECT_EQ(r1.termination, Termination::EvalError);
  EXPECT_FALSE(r1.message.empty());

  const SystemData blowup = make("x1 > -100", "x1 < -200", {"x1^2"}, {"x1"});
  SimConfig cfg;
  cfg.horizon = 5.0;
  const ClassicalRun r2 = simulate(blowup, State{1.0}, cfg);
  EXPECT_EQ(r2.termination, Termination::EvalError);
}

TEST(Simulator, JumpPriorityOnOverlap) {
  const SystemData sys = make("x1 > -1000", "x1 >= 1", {"1"}, {"x1 - 1"});
  SimConfig cfg;
  cfg.horizon = 0.5;
  const ClassicalRun jumping = simulate(sys, State{1.0}, cfg);
  ASSERT_FALSE(jumping.jumps.empty());
  EXPECT_EQ(jumping.jumps.front().t, 0.0);
  cfg.jump_priority = false;
  const ClassicalRun flowing = simulate(sys, State{1.0}, cfg);
  EXPECT_TRUE(flowing.jumps.empty());
  EXPECT_EQ(flowing.termination, Termination::Horizon);
}

TEST(Simulator, PeriodicImpactsAreNotZeno) {
  const SystemData sys = make("x1 >= 0 && x1 < 1", "x1 >= 1", {"1"}, {"x1 - 1"});
  SimConfig cfg;
  cfg.horizon = 20.0;
  const ClassicalRun run = simulate(sys, State{0.0}, cfg);
  EXPECT_EQ(run.termination, Termination::Horizon);
  EXPECT_GE(run.jumps.size(), 19u);
  expect_run_invariants(sys, run);
}

TEST(Simulator, InvalidInputs) {
  const SystemData ball = builtin_scenario("bouncing_ball");
  auto code = [&](State x0, SimConfig cfg) {
    try {
      simulate(ball, x0, cfg);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code({-1.0, 0.0}, {}), ErrorCode::InvalidInitialCondition);
  EXPECT_EQ(code({1.0}, {}), ErrorCode::InvalidInitialCondition);
  EXPECT_EQ(code({NAN, 0.0}, {}), ErrorCode::InvalidInitialCondition);
  SimConfig bad;
  bad.step = 0.0;
  EXPECT_EQ(code({1.0, 0.0}, bad), ErrorCode::InvalidConfig);
  SimConfig narrow;
  narrow.zeno_window = 2;
  EXPECT_EQ(code({1.0, 0.0}, narrow), ErrorCode::InvalidConfig);
}

TEST(DetectZeno, GeometricAndPeriodicSequences) {
  SimConfig cfg;
  std::vector<double> geometric;
  double t = 0.0;
  double gap = 1.0;
  for (int i = 0; i < 12; ++i) {
    geometric.push_back(t);
    t += gap;
    gap *= 0.5;
  }
  const auto cert = detect_zeno(geometric, cfg);
  ASSERT_TRUE(cert);
  EXPECT_NEAR(cert->ratio, 0.5, 1e-12);
  EXPECT_NEAR(cert->tau_hat, 2.0, 1e-12);
  EXPECT_EQ(cert->gaps.size(), cfg.zeno_window);

  std::vector<double> periodic;
  for (int i = 0; i < 12; ++i) periodic.push_back(0.5 * i);
  EXPECT_FALSE(detect_zeno(periodic, cfg));

  EXPECT_FALSE(detect_zeno(std::vector<double>(geometric.begin(), geometric.begin() + 5), cfg));
}

TEST(DetectZeno, RejectsIrregularRatios) {
  SimConfig cfg;
  std::vector<double> times{0.0};
  double gap = 1.0;
  for (int i = 0; i < 12; ++i) {
    gap *= (i % 2) ? 0.3 : 0.7;
    times.push_back(times.back() + gap);
  }
  EXPECT_FALSE(detect_zeno(times, cfg));
}

// Property: random ball initial data give valid runs with exact jump maps.
TEST(SimulatorProperty, RandomBallRunsSatisfyInvariants) {
  oracle::Rng rng(99);
  SimConfig cfg;
  cfg.horizon = 3.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double lambda = rng.uniform(0.2, 0.8);
    const SystemData ball = builtin_scenario("bouncing_ball", {lambda, 9.81});
    const State x0{rng.uniform(0.0, 4.0), rng.uniform(-5.0, 5.0)};
    const ClassicalRun run = simulate(ball, x0, cfg);
    expect_run_invariants(ball, run);
    for (const auto& ev : run.jumps) EXPECT_LE(std::fabs(ev.pre[0]), 1e-8);
    if (run.termination == Termination::ZenoDetected) {
      EXPECT_NEAR(run.zeno->tau_hat, oracle::zeno_time(x0[0], x0[1], lambda), 1e-2);
    }
  }
}
