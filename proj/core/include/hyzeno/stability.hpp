#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyzeno/dynamics.hpp"
#include "hyzeno/prolongation.hpp"
#include "hyzeno/sampling.hpp"
#include "hyzeno/simulator.hpp"

namespace hyzeno {

/// Closed set given by a membership predicate and its Euclidean distance.
struct ClosedSetSpec {
  Expr membership;
  Expr distance;
};

/// Parses both expressions in the system's context (states and parameters).
ClosedSetSpec make_set(const SystemData& sys, std::string_view membership, std::string_view distance);

/// The distance expression at x. Throws Error(NegativeDistance).
double distance(const SystemData& sys, const ClosedSetSpec& set, std::span<const double> x);
bool in_set(const SystemData& sys, const ClosedSetSpec& set, std::span<const double> x);

enum class ComparisonKind { ClassKInf, PositiveDefinite };

/// Scalar function of `s`; `params` holds the owning system's parameter values.
struct ComparisonFn {
  Expr expr;
  ComparisonKind kind = ComparisonKind::ClassKInf;
  std::vector<double> params;

  double operator()(double s) const;
};

/// Parses an expression in the single variable `s`; system parameters are visible.
ComparisonFn make_comparison(const SystemData& sys, std::string_view text, ComparisonKind kind);

struct CheckResult {
  bool pass = true;
  std::string message;
};

/// Class-K∞ checks on [0, s_max]: value 0 at 0, strict increase on a grid
/// of `points` points, and growth beyond its value at s_max / 2.
CheckResult check_class_kinf(const ComparisonFn& fn, double s_max = 100.0, std::size_t points = 1000);
/// ρ(0) = 0 and ρ(s) > 0 on a grid of (0, s_max].
CheckResult check_positive_definite(const ComparisonFn& fn, double s_max = 100.0, std::size_t points = 1000);

struct LyapunovCertificate {
  Expr V;
  ComparisonFn alpha1;
  ComparisonFn alpha2;
  ComparisonFn rho;
  ClosedSetSpec set;
  std::optional<SampleSpec> grid;  // default sampling region, if the file supplies one
};

/// {"V", "alpha1", "alpha2", "rho", "set_membership", "set_distance"} plus an
/// optional {"grid": {"lo": [...], "hi": [...], "samples": N, "face_fraction": f}}.
LyapunovCertificate parse_certificate(const SystemData& sys, std::string_view json_text);

struct Margin {
  std::string name;
  double worst = kInfinity;  // smallest slack seen; negative means violated
  State witness;
  std::size_t evaluated = 0;
};

struct Counterexample {
  std::string inequality;
  State x;
  double slack = 0.0;
};

struct LyapunovOptions {
  double eps_slack = 1e-9;
  std::size_t max_counterexamples = 16;
  std::size_t threads = 0;  // 0 picks the hardware concurrency
};

struct LyapunovReport {
  bool pass = false;
  Margin sandwich_lower{"alpha1(|x|_A) <= V(x)", kInfinity, {}, 0};
  Margin sandwich_upper{"V(x) <= alpha2(|x|_A)", kInfinity, {}, 0};
  Margin flow_decrease{"<grad V, f> <= -rho(|x|_A) on C", kInfinity, {}, 0};
  Margin jump_decrease{"V(g(x)) - V(x) <= -rho(|x|_A) on D", kInfinity, {}, 0};
  std::size_t samples = 0;
  std::size_t in_flow_set = 0;
  std::size_t in_jump_set = 0;
  std::size_t outside = 0;      // samples in neither C nor D
  std::size_t eval_errors = 0;  // samples skipped because evaluation failed
  std::vector<Counterexample> counterexamples;
  std::vector<std::string> comparison_issues;  // failed K∞ / PD checks
};

/// Samples the grid and checks the sandwich bound on C ∪ D ∪ g(D), flow
/// decrease on C, and jump decrease on D. Throws Error(GradientUnavailable)
/// if the gradient cannot be evaluated on most flow-set samples.
LyapunovReport check_lyapunov(const SystemData& sys, const LyapunovCertificate& cert, const SampleSpec& grid,
                              const LyapunovOptions& opts = {});

/// H ∩ A: flow set C ∧ A, jump set D ∧ A, maps unchanged.
SystemData restrict_system(const SystemData& sys, const ClosedSetSpec& set);

struct TrajectoryWitness {
  State x0;
  State x;
  double t = 0.0;
  std::size_t j = 0;
  std::size_t k = 0;
  double value = 0.0;
};

struct SfpiReport {
  bool pass = true;
  double max_distance = 0.0;
  std::optional<TrajectoryWitness> witness;
};

/// Simulates each sample (which must lie in the set) and checks the range
/// stays within eps_inv of it. Throws Error(InvalidArgument) for samples
/// outside the set.
SfpiReport check_sfpi(const SystemData& sys, const ClosedSetSpec& set, const std::vector<State>& samples,
                      const SimConfig& cfg, double eps_inv = 1e-6);

struct AttractivityOptions {
  double eps = 0.05;
  double r = 1.0;
  bool extended = false;
  ExtendedConfig ext;
};

struct AttractivityReport {
  bool pass = false;
  double T = 0.0;
  std::size_t K = 0;
  bool undecided = false;  // some run ended before the question was settled
  std::optional<TrajectoryWitness> witness;
  std::string message;
};

/// Classical mode: the smallest sampled T with t + j >= T => |x|_A <= eps on
/// every run. Extended mode: the smallest K (then T) satisfying the
/// three-clause over-Zeno condition. Samples farther than r from the set
/// are rejected with Error(InvalidArgument); undecidable data raises
/// Error(BudgetExceeded).
AttractivityReport check_attractivity(const SystemData& sys, const ClosedSetSpec& set,
                                      const std::vector<State>& samples, const SimConfig& cfg,
                                      const AttractivityOptions& opts);

struct UgsOptions {
  std::size_t samples_per_radius = 16;
  bool extended = false;
  ExtendedConfig ext;
  State anchor;                 // point of the set; defaults to the origin
  double growth_tol = 0.01;     // sup over [0, T] vs sup over [0, T/2]
  double min_slope = 0.25;      // log-log slope of m(r) over the two smallest radii
  double vanish_floor = 1e-12;  // m(r_min) at or below this counts as vanishing
};

struct UgsReport {
  bool pass = false;
  std::vector<double> radii;
  std::vector<double> envelope;     // m(r)
  std::vector<std::size_t> counts;  // samples used per radius
  bool finite = true;
  bool bounded_growth = true;
  bool vanishing = true;
  double slope = 0.0;
  std::optional<TrajectoryWitness> witness;  // largest growth seen when bounded_growth fails
};

/// Envelope m(r) = max over samples at distance r of sup |x(t)|_A.
UgsReport check_ugs_envelope(const SystemData& sys, const ClosedSetSpec& set, const std::vector<double>& radii,
                             const SimConfig& cfg, const UgsOptions& opts = {});

/// Points at distance r from the set, along rays from `anchor`, that lie in C ∪ D.
std::vector<State> samples_at_distance(const SystemData& sys, const ClosedSetSpec& set, std::span<const double> anchor,
                                       double r, std::size_t count, std::size_t seed = 0);

}  // namespace hyzeno
