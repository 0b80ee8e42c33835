#include "hyzeno/narrowing.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "hyzeno/error.hpp"
#include "parallel.hpp"

namespace hyzeno {

std::string_view to_string(NarrowingVerdict v) {
  switch (v) {
    case NarrowingVerdict::UGpASoZConsistent: return "UGpASoZ-consistent";
    case NarrowingVerdict::UGSoZGpAoZConsistent: return "UGSoZ+GpAoZ-consistent";
    case NarrowingVerdict::Fail: return "fail";
  }
  return "?";
}

Chain parse_chain(const SystemData& sys, std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("stages") || !doc["stages"].is_array() || doc["stages"].empty())
    throw Error(ErrorCode::SchemaError, "chain must be an object with a non-empty 'stages' array");
  Chain chain;
  for (std::size_t i = 0; i < doc["stages"].size(); ++i) {
    NarrowingStage st;
    try {
      st.cert = parse_certificate(sys, doc["stages"][i].dump());
    } catch (const ParseError& e) {
      throw ParseError(e.code(), e.position(), fmt::format("stage {}: {}", i + 1, e.reason()));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("stage {}: {}", i + 1, e.detail()));
    }
    if (!st.cert.grid) throw Error(ErrorCode::SchemaError, fmt::format("stage {} has no 'grid'", i + 1));
    st.grid = *st.cert.grid;
    chain.stages.push_back(std::move(st));
  }
  return chain;
}

namespace {

bool in_union(const SystemData& sys, const State& x) { return in_flow_set(sys, x) || in_jump_set(sys, x); }

struct RunOutcome {
  enum Kind { Zeno, Reached, Failed } kind = Failed;
  double omega_distance = 0.0;
  bool approaches = false;  // distance to A_i decreased monotonically without reaching it
  std::optional<TrajectoryWitness> witness;
};

RunOutcome classify_run(const SystemData& restricted, const ClosedSetSpec& target, const State& x0,
                        const NarrowingOptions& opts) {
  RunOutcome out;
  const ClassicalRun run = simulate(restricted, x0, opts.sim);
  if (run.termination == Termination::ZenoDetected) {
    try {
      const OmegaEstimate om = estimate_omega(run, opts.omega);
      out.kind = RunOutcome::Zeno;
      for (const auto& p : om.points) out.omega_distance = std::max(out.omega_distance, distance(restricted, target, p));
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergentTail) throw;
    }
  }
  double best = kInfinity;
  double prev = kInfinity;
  bool monotone = true;
  for (const auto& seg : run.segments)
    for (const auto& s : seg.samples) {
      const double d = distance(restricted, target, s.x);
      if (d > prev) monotone = false;
      prev = d;
      if (d < best) {
        best = d;
        out.witness = TrajectoryWitness{x0, s.x, s.t, seg.j, 0, d};
      }
    }
  if (best <= opts.reach_tol) {
    out.kind = RunOutcome::Reached;
    out.witness.reset();
    return out;
  }
  out.kind = RunOutcome::Failed;
  out.approaches = monotone;
  return out;
}

}  // namespace

NarrowingReport sequential_narrowing(const SystemData& sys, const Chain& chain, const NarrowingOptions& opts) {
  if (chain.stages.empty()) throw Error(ErrorCode::InvalidArgument, "chain has no stages");
  const std::size_t n = chain.stages.size();
  std::vector<std::vector<State>> grids;
  for (const auto& st : chain.stages) grids.push_back(sample_grid(st.grid));

  NarrowingReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    StageReport sr;
    sr.index = i + 1;
    const ClosedSetSpec& target = chain.stages[i].cert.set;
    const ClosedSetSpec* outer = i == 0 ? nullptr : &chain.stages[i - 1].cert.set;

    // Nesting: members of A_i among any stage's samples must lie in A_{i-1}.
    for (const auto& grid : grids)
      for (const auto& x : grid) {
        if (!in_set(sys, target, x)) continue;
        ++sr.nesting_samples;
        const bool inside = outer ? in_set(sys, *outer, x) : in_union(sys, x);
        if (!inside)
          throw Error(ErrorCode::ChainNotNested,
                      fmt::format("a sampled point of A_{} lies outside A_{}", i + 1, i));
      }
    if (sr.nesting_samples == 0) sr.notes.push_back("no sampled member of the set; nesting not exercised");

    const SystemData restricted = outer ? restrict_system(sys, *outer) : sys;
    sr.lyapunov = check_lyapunov(restricted, chain.stages[i].cert, chain.stages[i].grid, opts.lyapunov);
    sr.restricted_jump_samples = sr.lyapunov.in_jump_set;

    if (i + 1 < n) {
      std::vector<State> starts;
      for (const auto& x : grids[i]) {
        if (starts.size() >= opts.max_runs_per_stage) break;
        if (in_union(restricted, x) && !in_set(sys, target, x)) starts.push_back(x);
      }
      std::vector<RunOutcome> outcomes(starts.size());
      detail::parallel_for(starts.size(), opts.lyapunov.threads,
                           [&](std::size_t r) { outcomes[r] = classify_run(restricted, target, starts[r], opts); });
      sr.runs = starts.size();
      bool caveat = false;
      for (const auto& o : outcomes) {
        switch (o.kind) {
          case RunOutcome::Zeno:
            ++sr.zeno_runs;
            sr.max_omega_distance = std::max(sr.max_omega_distance, o.omega_distance);
            break;
          case RunOutcome::Reached: ++sr.reaching_runs; break;
          case RunOutcome::Failed:
            ++sr.failed_runs;
            caveat = caveat || o.approaches;
            if (!sr.witness) sr.witness = o.witness;
            break;
        }
      }
      if (sr.runs == 0) sr.notes.push_back("no sampled initial condition outside the set");
      if (caveat)
        sr.notes.push_back("a run approaches the set monotonically without meeting it within the horizon");
      if (sr.max_omega_distance > 1e-3)
        sr.notes.push_back(fmt::format("an ω-estimate lies {} from the set", sr.max_omega_distance));
    }
    rep.stages.push_back(std::move(sr));
  }

  bool reaching = false;
  for (const auto& sr : rep.stages) {
    std::string why;
    if (!sr.lyapunov.pass) why = "Lyapunov conditions fail on the restricted system";
    else if (sr.failed_runs > 0) why = "a run outside the set is neither Zeno with a convergent tail nor reaches it";
    if (!why.empty()) {
      rep.verdict = NarrowingVerdict::Fail;
      rep.failed_stage = sr.index;
      rep.message = fmt::format("stage {}: {}", sr.index, why);
      return rep;
    }
    reaching = reaching || sr.reaching_runs > 0;
  }
  rep.verdict = reaching ? NarrowingVerdict::UGSoZGpAoZConsistent : NarrowingVerdict::UGpASoZConsistent;
  rep.K = n - 1;
  rep.message = fmt::format("chain of {} stage(s) is {}", n, to_string(rep.verdict));
  return rep;
}

}  // namespace hyzeno
