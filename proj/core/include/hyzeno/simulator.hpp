#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyzeno/dynamics.hpp"
#include "hyzeno/time_domain.hpp"

namespace hyzeno {

struct SimConfig {
  double step = 1e-3;           // RK4 step h
  double event_tol = 1e-9;      // bisection window for guard localization
  double horizon = 10.0;        // absolute final time T_max
  std::size_t max_jumps = 10000;
  std::size_t zeno_window = 8;  // trailing inter-jump intervals inspected
  double zeno_ratio_tol = 0.05;
  double zeno_time_eps = 1e-6;  // stop once the extrapolated remaining time is below this
  bool jump_priority = true;    // on C ∩ D, jump rather than flow

  /// Throws Error(InvalidConfig).
  void validate() const;
};

struct Sample {
  double t = 0.0;
  State x;
};

/// One flow interval of a classical run: samples over [t_start, t_end] at jump index j.
struct ArcSegment {
  std::size_t j = 0;
  std::vector<Sample> samples;

  double t_start() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
};

struct JumpEvent {
  double t = 0.0;
  std::size_t j = 0;  // jump index before the jump
  State pre;
  State post;         // == g(pre) bitwise
};

enum class FlowExitKind { EnteredD, HorizonReached, LeftCAndD };

struct FlowResult {
  std::vector<Sample> samples;  // starts with (t0, x0)
  FlowExitKind exit = FlowExitKind::HorizonReached;
};

/// Integrates from x0 at time t0 until the state enters D, leaves C ∪ D, or
/// the horizon is reached. The last sample is the exit state. Throws
/// Error(IntegrationError) on a non-finite state.
FlowResult flow_segment(const SystemData& sys, std::span<const double> x0, double t0, const SimConfig& cfg);

/// g(x). Throws Error(NotInJumpSet) if x ∉ D.
State apply_jump(const SystemData& sys, std::span<const double> x);

struct ZenoCertificate {
  double tau_hat = 0.0;
  double ratio = 0.0;
  double t_last = 0.0;
  std::vector<double> gaps;    // trailing inter-jump intervals, oldest first
  std::vector<double> ratios;  // gaps[i+1] / gaps[i]
};

/// Geometric-tail test on the last zeno_window intervals. Returns nullopt if
/// there are too few jump times or no common ratio r < 1.
std::optional<ZenoCertificate> detect_zeno(std::span<const double> jump_times, const SimConfig& cfg);

enum class Termination { Horizon, ZenoDetected, MaxJumps, Deadlock, EvalError };

std::string_view to_string(Termination t);

struct ClassicalRun {
  State x0;
  double t0 = 0.0;
  std::vector<ArcSegment> segments;
  std::vector<JumpEvent> jumps;
  Termination termination = Termination::Horizon;
  std::optional<ZenoCertificate> zeno;
  std::string message;  // deadlock or evaluation error details

  const State& final_state() const { return segments.back().samples.back().x; }
  double final_time() const { return segments.back().samples.back().t; }
  std::vector<double> jump_times() const;

  /// Classical (t, j) domain. The last interval of a Horizon run ends at the horizon.
  ClassicalDomain domain() const;

  /// The run's domain as level k of an extended domain, certified complete
  /// when the run ended Zeno or flowing at the horizon.
  ExtendedHybridTimeDomain extended_domain(std::size_t k = 0) const;
};

/// Simulates from x0 at time t0 (default 0). Throws Error(InvalidInitialCondition)
/// if x0 ∉ C ∪ D. Evaluation failures along the way end the run with EvalError.
ClassicalRun simulate(const SystemData& sys, std::span<const double> x0, const SimConfig& cfg, double t0 = 0.0);

}  // namespace hyzeno
