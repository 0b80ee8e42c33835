#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hyzeno/simulator.hpp"
#include "hyzeno/time_domain.hpp"

namespace hyzeno {

struct OmegaConfig {
  double tol = 1e-3;             // cluster radius and convergence tolerance
  std::size_t window = 8;        // number of trailing post-jump states used
  std::size_t max_period = 4;
  double eps_eq = kDefaultEpsEq; // floor of the zero-snapping threshold
};

struct OmegaEstimate {
  std::vector<State> points;  // lexicographically sorted
  std::size_t period = 1;
  double residual = 0.0;
};

/// Estimates the ω-limit set from the tail of a Zeno run. Components whose
/// magnitude is below max(eps_eq, residual) are reported as exactly 0.
/// Throws Error(NotZeno) if the run did not end ZenoDetected and
/// Error(NonConvergentTail) if no period up to max_period converges.
OmegaEstimate estimate_omega(const ClassicalRun& run, const OmegaConfig& cfg = {});

struct Continuation {
  State x;
  double t_start = 0.0;
  std::size_t k = 0;
  bool deadlock = false;  // x ∉ C ∪ D
};

/// One continuation per ω-point, starting at the parent's Zeno time with
/// Zeno index parent_k + 1. Throws Error(EmptyOmega) or Error(NotZeno).
std::vector<Continuation> prolong(const SystemData& sys, const ClassicalRun& run, const OmegaEstimate& omega,
                                  std::size_t parent_k = 0);

struct ExtendedConfig {
  std::size_t max_zeno = 3;       // K_max
  std::size_t branch_budget = 16; // B_max
  OmegaConfig omega;
};

struct Branch {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  std::size_t k = 0;
  State start;
  double t_start = 0.0;
  bool deadlock = false;  // started outside C ∪ D; run holds the single start sample
  ClassicalRun run;
  std::optional<OmegaEstimate> omega;
  std::string omega_error;  // set when ω-estimation failed for a Zeno run
  std::vector<std::size_t> children;
};

struct ExtendedSolution {
  std::vector<Branch> branches;  // depth-first order, branches[0] is level 0
  bool budget_exceeded = false;

  std::vector<std::size_t> leaves() const;
  /// Branch ids from the root to `leaf`.
  std::vector<std::size_t> path(std::size_t leaf) const;
  /// Aggregated domain along the path to `leaf`.
  ExtendedHybridTimeDomain path_domain(std::size_t leaf) const;
  /// Zeno times (k, τ̂) along the path to `leaf`.
  std::vector<std::pair<std::size_t, double>> zeno_events(std::size_t leaf) const;
};

/// Depth-first extended solution. Level 0 is exactly simulate(sys, x0, cfg).
/// Never throws on budget exhaustion; check budget_exceeded.
ExtendedSolution simulate_extended(const SystemData& sys, std::span<const double> x0, const SimConfig& cfg,
                                   const ExtendedConfig& ext = {});

}  // namespace hyzeno
