#include "hyzeno/prolongation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hyzeno/error.hpp"

namespace hyzeno {
namespace {

double dist(const State& a, const State& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct PeriodFit {
  std::vector<State> limits;
  double residual = 0.0;
};

// Splits the tail into `p` interleaved subsequences (aligned on the last
// element) and extrapolates each with ratio r^p.
PeriodFit fit_period(const std::vector<State>& tail, std::size_t p, double r) {
  PeriodFit fit;
  const double rp = std::pow(r, static_cast<double>(p));
  const double gain = rp / (1.0 - rp);
  const std::size_t n = tail.size();
  for (std::size_t q = 0; q < p && q < n; ++q) {
    std::vector<const State*> sub;
    for (std::size_t i = n - 1 - q;; i -= p) {
      sub.push_back(&tail[i]);
      if (i < p) break;
    }
    std::reverse(sub.begin(), sub.end());
    const State& last = *sub.back();
    State limit = last;
    if (sub.size() >= 2) {
      const State& prev = *sub[sub.size() - 2];
      for (std::size_t c = 0; c < last.size(); ++c) limit[c] = last[c] + (last[c] - prev[c]) * gain;
    }
    for (std::size_t i = 0; i + 1 < sub.size(); ++i) fit.residual = std::max(fit.residual, dist(*sub[i], *sub[i + 1]));
    fit.residual = std::max(fit.residual, dist(last, limit));
    fit.limits.push_back(std::move(limit));
  }
  return fit;
}

}  // namespace

OmegaEstimate estimate_omega(const ClassicalRun& run, const OmegaConfig& cfg) {
  if (run.termination != Termination::ZenoDetected || !run.zeno)
    throw Error(ErrorCode::NotZeno, fmt::format("run ended {}, not ZenoDetected", to_string(run.termination)));
  if (run.jumps.empty()) throw Error(ErrorCode::NotZeno, "run has no jumps");

  const std::size_t m = std::min(cfg.window, run.jumps.size());
  std::vector<State> tail;
  for (std::size_t i = run.jumps.size() - m; i < run.jumps.size(); ++i) tail.push_back(run.jumps[i].post);

  const double r = run.zeno->ratio;
  double best_residual = kInfinity;
  for (std::size_t p = 1; p <= cfg.max_period && p <= m; ++p) {
    PeriodFit fit = fit_period(tail, p, r);
    best_residual = std::min(best_residual, fit.residual);
    if (fit.residual > cfg.tol) continue;

    OmegaEstimate est;
    est.period = p;
    est.residual = fit.residual;
    // Extrapolated limits are only as accurate as the fit itself.
    const double snap = std::max(cfg.eps_eq, fit.residual);
    for (auto& lim : fit.limits) {
      for (double& v : lim)
        if (std::abs(v) <= snap) v = 0.0;
      const bool merged =
          std::any_of(est.points.begin(), est.points.end(), [&](const State& q) { return dist(q, lim) <= cfg.tol; });
      if (!merged) est.points.push_back(std::move(lim));
    }
    std::sort(est.points.begin(), est.points.end());
    return est;
  }
  throw Error(ErrorCode::NonConvergentTail,
              fmt::format("no period up to {} converges within {} (best residual {})", cfg.max_period, cfg.tol,
                          best_residual));
}

std::vector<Continuation> prolong(const SystemData& sys, const ClassicalRun& run, const OmegaEstimate& omega,
                                  std::size_t parent_k) {
  if (!run.zeno) throw Error(ErrorCode::NotZeno, "cannot prolong a run without a Zeno certificate");
  if (omega.points.empty()) throw Error(ErrorCode::EmptyOmega, "ω-limit estimate has no points");
  std::vector<Continuation> out;
  for (const auto& p : omega.points) {
    Continuation c;
    c.x = p;
    c.t_start = run.zeno->tau_hat;
    c.k = parent_k + 1;
    c.deadlock = !in_flow_set(sys, p) && !in_jump_set(sys, p);
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

struct Builder {
  const SystemData& sys;
  const SimConfig& cfg;
  const ExtendedConfig& ext;
  ExtendedSolution sol;

  void expand(std::size_t id) {
    Branch& b = sol.branches[id];
    if (b.deadlock || b.run.termination != Termination::ZenoDetected || b.k >= ext.max_zeno) return;
    std::vector<Continuation> conts;
    try {
      b.omega = estimate_omega(b.run, ext.omega);
      conts = prolong(sys, b.run, *b.omega, b.k);
    } catch (const Error& e) {
      sol.branches[id].omega_error = e.what();
      return;
    }
    for (auto& c : conts) {
      if (sol.branches.size() >= ext.branch_budget) {
        sol.budget_exceeded = true;
        return;
      }
      const std::size_t child = add_branch(id, c);
      sol.branches[id].children.push_back(child);
      expand(child);
      if (sol.budget_exceeded) return;
    }
  }

  std::size_t add_branch(std::optional<std::size_t> parent, const Continuation& c) {
    Branch nb;
    nb.id = sol.branches.size();
    nb.parent = parent;
    nb.k = c.k;
    nb.start = c.x;
    nb.t_start = c.t_start;
    nb.deadlock = c.deadlock;
    if (c.deadlock) {
      nb.run.x0 = c.x;
      nb.run.t0 = c.t_start;
      nb.run.segments.push_back({0, {{c.t_start, c.x}}});
      nb.run.termination = Termination::Deadlock;
      nb.run.message = "ω-limit point lies outside C ∪ D";
    } else {
      nb.run = simulate(sys, c.x, cfg, c.t_start);
    }
    sol.branches.push_back(std::move(nb));
    return sol.branches.size() - 1;
  }
};

}  // namespace

ExtendedSolution simulate_extended(const SystemData& sys, std::span<const double> x0, const SimConfig& cfg,
                                   const ExtendedConfig& ext) {
  if (ext.branch_budget == 0) throw Error(ErrorCode::InvalidConfig, "branch budget must be positive");
  Builder b{sys, cfg, ext, {}};
  Branch root;
  root.start.assign(x0.begin(), x0.end());
  root.run = simulate(sys, x0, cfg);
  b.sol.branches.push_back(std::move(root));
  b.expand(0);
  return std::move(b.sol);
}

std::vector<std::size_t> ExtendedSolution::leaves() const {
  std::vector<std::size_t> out;
  for (const auto& b : branches)
    if (b.children.empty()) out.push_back(b.id);
  return out;
}

std::vector<std::size_t> ExtendedSolution::path(std::size_t leaf) const {
  if (leaf >= branches.size()) throw Error(ErrorCode::InvalidArgument, fmt::format("no branch {}", leaf));
  std::vector<std::size_t> out;
  for (std::optional<std::size_t> cur = leaf; cur; cur = branches[*cur].parent) out.push_back(*cur);
  std::reverse(out.begin(), out.end());
  return out;
}

ExtendedHybridTimeDomain ExtendedSolution::path_domain(std::size_t leaf) const {
  ExtendedHybridTimeDomain d;
  for (std::size_t id : path(leaf)) {
    const Branch& b = branches[id];
    for (const auto& s : b.run.segments) d.append({s.t_start(), s.t_end(), s.j, b.k});
    if (b.run.termination == Termination::ZenoDetected) d.certify_level(b.k, LevelCompletion::Zeno);
    if (b.run.termination == Termination::Horizon) d.certify_level(b.k, LevelCompletion::UnboundedFlow);
  }
  return d;
}

std::vector<std::pair<std::size_t, double>> ExtendedSolution::zeno_events(std::size_t leaf) const {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t id : path(leaf)) {
    const Branch& b = branches[id];
    if (b.run.zeno) out.emplace_back(b.k, b.run.zeno->tau_hat);
  }
  return out;
}

}  // namespace hyzeno
