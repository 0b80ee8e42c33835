#include "hyzeno/stability.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "hyzeno/error.hpp"
#include "parallel.hpp"

namespace hyzeno {

// -- sets and comparison functions ----------------------------------------------

ClosedSetSpec make_set(const SystemData& sys, std::string_view membership, std::string_view distance) {
  const ParseContext ctx = sys.parse_context();
  ClosedSetSpec set{parse_expr(membership, ctx), parse_expr(distance, ctx)};
  if (!set.membership.is_bool()) throw Error(ErrorCode::TypeMismatch, "set membership must be boolean");
  if (!set.distance.is_real()) throw Error(ErrorCode::TypeMismatch, "set distance must be real-valued");
  return set;
}

double distance(const SystemData& sys, const ClosedSetSpec& set, std::span<const double> x) {
  const double d = eval_real(set.distance, sys.env(x));
  if (d < 0.0 || std::isnan(d))
    throw Error(ErrorCode::NegativeDistance, fmt::format("distance expression returned {}", d));
  return d;
}

bool in_set(const SystemData& sys, const ClosedSetSpec& set, std::span<const double> x) {
  return eval_bool(set.membership, sys.env(x));
}

double ComparisonFn::operator()(double s) const {
  EvalEnv env;
  env.state = std::span<const double>(&s, 1);
  env.params = params;
  return eval_real(expr, env);
}

ComparisonFn make_comparison(const SystemData& sys, std::string_view text, ComparisonKind kind) {
  ParseContext ctx;
  ctx.state_dim = 0;
  ctx.params = sys.param_names;
  ctx.state_aliases.emplace("s", 0);
  ComparisonFn fn{parse_expr(text, ctx), kind, sys.param_values};
  if (!fn.expr.is_real()) throw Error(ErrorCode::TypeMismatch, "comparison function must be real-valued");
  return fn;
}

CheckResult check_class_kinf(const ComparisonFn& fn, double s_max, std::size_t points) {
  const double f0 = fn(0.0);
  if (std::abs(f0) > 1e-12) return {false, fmt::format("value at 0 is {}, expected 0", f0)};
  double prev = f0;
  for (std::size_t i = 1; i <= points; ++i) {
    const double s = s_max * static_cast<double>(i) / static_cast<double>(points);
    const double v = fn(s);
    if (!(v > prev)) return {false, fmt::format("not strictly increasing at s = {} ({} after {})", s, v, prev)};
    prev = v;
  }
  if (!(fn(2.0 * s_max) > prev)) return {false, "no growth beyond the sampled range"};
  return {};
}

CheckResult check_positive_definite(const ComparisonFn& fn, double s_max, std::size_t points) {
  const double f0 = fn(0.0);
  if (std::abs(f0) > 1e-12) return {false, fmt::format("value at 0 is {}, expected 0", f0)};
  for (std::size_t i = 1; i <= points; ++i) {
    const double s = s_max * static_cast<double>(i) / static_cast<double>(points);
    const double v = fn(s);
    if (!(v > 0.0)) return {false, fmt::format("not positive at s = {} (value {})", s, v)};
  }
  return {};
}

// -- certificates ---------------------------------------------------------------

namespace {

using Json = nlohmann::json;

std::string field(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_string())
    throw Error(ErrorCode::SchemaError, fmt::format("certificate field '{}' must be an expression string", key));
  return it->get<std::string>();
}

template <class Fn>
auto attributed(const char* key, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(e.code(), e.position(), fmt::format("in field '{}': {}", key, e.reason()));
  }
}

std::vector<double> number_list(const Json& v, const char* key) {
  if (!v.is_array()) throw Error(ErrorCode::SchemaError, fmt::format("'{}' must be an array of numbers", key));
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw Error(ErrorCode::SchemaError, fmt::format("'{}' must be an array of numbers", key));
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

LyapunovCertificate parse_certificate(const SystemData& sys, std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "certificate must be a JSON object");

  LyapunovCertificate cert;
  const ParseContext ctx = sys.parse_context();
  cert.V = attributed("V", [&] { return parse_expr(field(doc, "V"), ctx); });
  if (!cert.V.is_real()) throw Error(ErrorCode::SchemaError, "V must be real-valued");
  cert.alpha1 = attributed("alpha1", [&] { return make_comparison(sys, field(doc, "alpha1"), ComparisonKind::ClassKInf); });
  cert.alpha2 = attributed("alpha2", [&] { return make_comparison(sys, field(doc, "alpha2"), ComparisonKind::ClassKInf); });
  cert.rho = attributed("rho", [&] { return make_comparison(sys, field(doc, "rho"), ComparisonKind::PositiveDefinite); });
  const std::string mem = field(doc, "set_membership");
  const std::string dist = field(doc, "set_distance");
  cert.set = attributed("set_membership/set_distance", [&] { return make_set(sys, mem, dist); });

  if (auto it = doc.find("grid"); it != doc.end()) {
    if (!it->is_object()) throw Error(ErrorCode::SchemaError, "'grid' must be an object");
    SampleSpec g;
    g.box.lo = number_list(it->value("lo", Json()), "grid.lo");
    g.box.hi = number_list(it->value("hi", Json()), "grid.hi");
    if (g.box.lo.size() != sys.dim || g.box.hi.size() != sys.dim)
      throw Error(ErrorCode::SchemaError, fmt::format("grid bounds must have {} entries", sys.dim));
    if (it->contains("samples")) {
      const auto& n = (*it)["samples"];
      if (!n.is_number_integer() || n.get<long long>() <= 0)
        throw Error(ErrorCode::SchemaError, "'grid.samples' must be a positive integer");
      g.count = n.get<std::size_t>();
    }
    if (it->contains("face_fraction")) {
      const auto& f = (*it)["face_fraction"];
      if (!f.is_number()) throw Error(ErrorCode::SchemaError, "'grid.face_fraction' must be a number");
      g.face_fraction = f.get<double>();
    }
    cert.grid = std::move(g);
  }
  return cert;
}

// -- Lyapunov check ---------------------------------------------------------------

namespace {

struct PointEval {
  bool error = false;
  bool gradient_error = false;
  bool in_c = false;
  bool in_d = false;
  double lower = kInfinity;  // V - alpha1
  double upper = kInfinity;  // alpha2 - V
  double flow = kInfinity;   // -(<grad V, f> + rho)
  double jump = kInfinity;   // -(V(g) - V + rho)
  State gx;
  double lower_g = kInfinity;
  double upper_g = kInfinity;
};

void update(Margin& m, double slack, const State& x) {
  if (slack == kInfinity) return;
  ++m.evaluated;
  if (slack < m.worst) {
    m.worst = slack;
    m.witness = x;
  }
}

}  // namespace

LyapunovReport check_lyapunov(const SystemData& sys, const LyapunovCertificate& cert, const SampleSpec& grid,
                              const LyapunovOptions& opts) {
  if (grid.box.dim() != sys.dim)
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("sampling box has dimension {}, system has {}", grid.box.dim(), sys.dim));
  if (state_arity(cert.V) > sys.dim) throw Error(ErrorCode::DimensionMismatch, "V references states beyond the system");
  const std::vector<State> points = sample_grid(grid);
  const std::vector<Expr> grad = gradient(cert.V, sys.dim);

  std::vector<PointEval> evals(points.size());
  detail::parallel_for(points.size(), opts.threads, [&](std::size_t i) {
    const State& x = points[i];
    PointEval& pe = evals[i];
    try {
      pe.in_c = in_flow_set(sys, x);
      pe.in_d = in_jump_set(sys, x);
      if (!pe.in_c && !pe.in_d) return;
      const EvalEnv env = sys.env(x);
      const double d = distance(sys, cert.set, x);
      const double v = eval_real(cert.V, env);
      pe.lower = v - cert.alpha1(d);
      pe.upper = cert.alpha2(d) - v;
      const double rho = cert.rho(d);
      if (pe.in_c) {
        const State f = flow(sys, x);
        double dot = 0.0;
        try {
          for (std::size_t c = 0; c < sys.dim; ++c) dot += eval_real(grad[c], env) * f[c];
        } catch (const Error&) {
          pe.gradient_error = true;
          throw;
        }
        pe.flow = -(dot + rho);
      }
      if (pe.in_d) {
        pe.gx = jump(sys, x);
        const double dg = distance(sys, cert.set, pe.gx);
        const double vg = eval_real(cert.V, sys.env(pe.gx));
        pe.jump = -(vg - v + rho);
        pe.lower_g = vg - cert.alpha1(dg);
        pe.upper_g = cert.alpha2(dg) - vg;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NegativeDistance) throw;
      pe.error = true;
    }
  });

  LyapunovReport rep;
  rep.samples = points.size();
  std::size_t gradient_errors = 0;
  double max_dist = 0.0;
  auto note = [&](const char* name, double slack, const State& x) {
    if (slack < -opts.eps_slack && rep.counterexamples.size() < opts.max_counterexamples)
      rep.counterexamples.push_back({name, x, slack});
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointEval& pe = evals[i];
    const State& x = points[i];
    if (pe.in_c) ++rep.in_flow_set;
    if (pe.in_d) ++rep.in_jump_set;
    if (!pe.in_c && !pe.in_d) {
      ++rep.outside;
      continue;
    }
    if (pe.error) {
      ++rep.eval_errors;
      if (pe.gradient_error) ++gradient_errors;
      continue;
    }
    max_dist = std::max(max_dist, distance(sys, cert.set, x));
    update(rep.sandwich_lower, pe.lower, x);
    update(rep.sandwich_upper, pe.upper, x);
    update(rep.flow_decrease, pe.flow, x);
    update(rep.jump_decrease, pe.jump, x);
    note("sandwich_lower", pe.lower, x);
    note("sandwich_upper", pe.upper, x);
    note("flow_decrease", pe.flow, x);
    note("jump_decrease", pe.jump, x);
    if (pe.in_d) {
      update(rep.sandwich_lower, pe.lower_g, pe.gx);
      update(rep.sandwich_upper, pe.upper_g, pe.gx);
      note("sandwich_lower", pe.lower_g, pe.gx);
      note("sandwich_upper", pe.upper_g, pe.gx);
    }
  }
  if (rep.in_flow_set > 0 && 2 * gradient_errors > rep.in_flow_set)
    throw Error(ErrorCode::GradientUnavailable,
                fmt::format("gradient of V failed to evaluate on {} of {} flow-set samples", gradient_errors,
                            rep.in_flow_set));

  const double s_max = std::max(1.0, max_dist);
  if (auto r = check_class_kinf(cert.alpha1, s_max); !r.pass) rep.comparison_issues.push_back("alpha1: " + r.message);
  if (auto r = check_class_kinf(cert.alpha2, s_max); !r.pass) rep.comparison_issues.push_back("alpha2: " + r.message);
  if (auto r = check_positive_definite(cert.rho, s_max); !r.pass) rep.comparison_issues.push_back("rho: " + r.message);

  const double floor = -opts.eps_slack;
  rep.pass = rep.comparison_issues.empty() && rep.sandwich_lower.worst >= floor &&
             rep.sandwich_upper.worst >= floor && rep.flow_decrease.worst >= floor &&
             rep.jump_decrease.worst >= floor;
  return rep;
}

SystemData restrict_system(const SystemData& sys, const ClosedSetSpec& set) {
  SystemData out = sys;
  out.name = sys.name + "_restricted";
  out.flow_set = Expr::binary(ExprOp::And, sys.flow_set, set.membership);
  out.jump_set = Expr::binary(ExprOp::And, sys.jump_set, set.membership);
  return out;
}

// -- trajectory sweeps ------------------------------------------------------------

namespace {

template <class Fn>
void for_each_point(const ClassicalRun& run, std::size_t k, Fn&& fn) {
  for (const auto& seg : run.segments)
    for (const auto& s : seg.samples) fn(s, seg.j, k);
}

TrajectoryWitness witness_at(const State& x0, const Sample& s, std::size_t j, std::size_t k, double value) {
  return {x0, s.x, s.t, j, k, value};
}

}  // namespace

SfpiReport check_sfpi(const SystemData& sys, const ClosedSetSpec& set, const std::vector<State>& samples,
                      const SimConfig& cfg, double eps_inv) {
  for (const auto& x : samples)
    if (!in_set(sys, set, x)) throw Error(ErrorCode::InvalidArgument, "SFpI sample lies outside the set");
  std::vector<std::optional<TrajectoryWitness>> worst(samples.size());
  detail::parallel_for(samples.size(), 0, [&](std::size_t i) {
    const ClassicalRun run = simulate(sys, samples[i], cfg);
    for_each_point(run, 0, [&](const Sample& s, std::size_t j, std::size_t k) {
      const double d = distance(sys, set, s.x);
      if (!worst[i] || d > worst[i]->value) worst[i] = witness_at(samples[i], s, j, k, d);
    });
  });
  SfpiReport rep;
  for (const auto& w : worst) {
    if (w && w->value > rep.max_distance) {
      rep.max_distance = w->value;
      rep.witness = w;
    }
  }
  rep.pass = rep.max_distance <= eps_inv;
  if (rep.pass) rep.witness.reset();
  return rep;
}

namespace {

struct PathLevel {
  const ClassicalRun* run = nullptr;
  std::size_t k = 0;
};

enum class KStatus { Feasible, Infeasible, Undecided };

struct KOutcome {
  KStatus status = KStatus::Feasible;
  double T = 0.0;
  std::optional<TrajectoryWitness> witness;
};

// Evaluates the over-Zeno attractivity condition for one solution (a path
// of levels) and one K. `open_end` marks a Zeno leaf that was not prolonged.
KOutcome evaluate_path(const SystemData& sys, const ClosedSetSpec& set, const State& x0,
                       const std::vector<PathLevel>& levels, bool open_end, std::size_t K, double eps) {
  KOutcome out;
  if (open_end) {
    out.status = KStatus::Undecided;
    return out;
  }
  const std::size_t sup_zeno = levels.back().k;
  const std::size_t relevant = std::min(K, sup_zeno);
  for (const auto& lv : levels) {
    if (lv.k < relevant) continue;
    const bool timed = (lv.k == relevant);
    std::optional<TrajectoryWitness> last_violation;
    for_each_point(*lv.run, lv.k, [&](const Sample& s, std::size_t j, std::size_t k) {
      const double d = distance(sys, set, s.x);
      if (d <= eps) return;
      const TrajectoryWitness w = witness_at(x0, s, j, k, d);
      if (!timed) {
        if (out.status == KStatus::Feasible) {
          out.status = KStatus::Infeasible;
          out.witness = w;
        }
        return;
      }
      out.T = std::max(out.T, s.t + static_cast<double>(j));
      last_violation = w;
    });
    if (!timed || !last_violation) continue;
    const Sample& end = lv.run->segments.back().samples.back();
    if (distance(sys, set, end.x) <= eps) continue;
    // The run ends outside the ε-ball: a Zeno level keeps producing such
    // points with unbounded t + j; a horizon stop cannot tell.
    if (lv.run->termination == Termination::ZenoDetected) {
      out.status = KStatus::Infeasible;
      out.witness = last_violation;
    } else if (lv.run->termination == Termination::Horizon || lv.run->termination == Termination::MaxJumps) {
      if (out.status == KStatus::Feasible) out.status = KStatus::Undecided;
      out.witness = last_violation;
    }
  }
  return out;
}

}  // namespace

AttractivityReport check_attractivity(const SystemData& sys, const ClosedSetSpec& set,
                                      const std::vector<State>& samples, const SimConfig& cfg,
                                      const AttractivityOptions& opts) {
  if (!(opts.eps > 0.0) || !(opts.r > 0.0))
    throw Error(ErrorCode::InvalidArgument, "attractivity needs positive eps and r");
  for (const auto& x : samples)
    if (distance(sys, set, x) > opts.r + 1e-12)
      throw Error(ErrorCode::InvalidArgument, "attractivity sample lies farther than r from the set");

  // Each solution becomes a list of levels; classical runs are single-level.
  struct Solution {
    State x0;
    std::vector<PathLevel> levels;
    bool open_end = false;
  };
  std::vector<ExtendedSolution> trees(opts.extended ? samples.size() : 0);
  std::vector<ClassicalRun> runs(opts.extended ? 0 : samples.size());
  detail::parallel_for(samples.size(), 0, [&](std::size_t i) {
    if (opts.extended)
      trees[i] = simulate_extended(sys, samples[i], cfg, opts.ext);
    else
      runs[i] = simulate(sys, samples[i], cfg);
  });
  std::vector<Solution> sols;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!opts.extended) {
      sols.push_back({samples[i], {{&runs[i], 0}}, false});
      continue;
    }
    const ExtendedSolution& tree = trees[i];
    for (std::size_t leaf : tree.leaves()) {
      Solution s{samples[i], {}, false};
      for (std::size_t id : tree.path(leaf)) s.levels.push_back({&tree.branches[id].run, tree.branches[id].k});
      const Branch& lb = tree.branches[leaf];
      s.open_end = lb.run.termination == Termination::ZenoDetected || tree.budget_exceeded;
      sols.push_back(std::move(s));
    }
  }

  AttractivityReport rep;
  const std::size_t k_max = opts.extended ? opts.ext.max_zeno : 0;
  std::optional<TrajectoryWitness> last_witness;
  for (std::size_t K = 0; K <= k_max; ++K) {
    KStatus status = KStatus::Feasible;
    double T = 0.0;
    for (const auto& s : sols) {
      const KOutcome o = evaluate_path(sys, set, s.x0, s.levels, s.open_end && opts.extended, K, opts.eps);
      T = std::max(T, o.T);
      if (o.status == KStatus::Infeasible) {
        status = KStatus::Infeasible;
        last_witness = o.witness;
        break;
      }
      if (o.status == KStatus::Undecided) {
        status = KStatus::Undecided;
        if (o.witness) last_witness = o.witness;
      }
    }
    if (status == KStatus::Feasible) {
      rep.pass = true;
      rep.K = K;
      rep.T = T;
      rep.message = fmt::format("t + j > {} with K = {} keeps every sampled solution within {}", T, K, opts.eps);
      return rep;
    }
    if (status == KStatus::Undecided) rep.undecided = true;
  }
  if (rep.undecided)
    throw Error(ErrorCode::BudgetExceeded, "horizon or Zeno budget too small to decide attractivity");
  rep.pass = false;
  rep.witness = last_witness;
  rep.message = fmt::format("no K up to {} works: a solution stays farther than {} from the set", k_max, opts.eps);
  return rep;
}

std::vector<State> samples_at_distance(const SystemData& sys, const ClosedSetSpec& set, std::span<const double> anchor,
                                       double r, std::size_t count, std::size_t seed) {
  std::vector<State> out;
  const auto dirs = sphere_directions(sys.dim, 64 * count + 64, seed);
  auto point = [&](const State& d, double s) {
    State x(anchor.begin(), anchor.end());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * d[i];
    return x;
  };
  for (const auto& d : dirs) {
    if (out.size() >= count) break;
    double hi = r;
    int grow = 0;
    while (distance(sys, set, point(d, hi)) < r && grow < 60) {
      hi *= 2.0;
      ++grow;
    }
    if (grow == 60) continue;
    double lo = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (distance(sys, set, point(d, mid)) < r ? lo : hi) = mid;
    }
    State x = point(d, hi);
    if (!in_flow_set(sys, x) && !in_jump_set(sys, x)) continue;
    out.push_back(std::move(x));
  }
  return out;
}

UgsReport check_ugs_envelope(const SystemData& sys, const ClosedSetSpec& set, const std::vector<double>& radii,
                             const SimConfig& cfg, const UgsOptions& opts) {
  if (radii.empty()) throw Error(ErrorCode::InvalidArgument, "radius grid is empty");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw Error(ErrorCode::InvalidArgument, "radii must be positive and increasing");
  const State anchor = opts.anchor.empty() ? State(sys.dim, 0.0) : opts.anchor;
  if (anchor.size() != sys.dim) throw Error(ErrorCode::DimensionMismatch, "anchor has the wrong dimension");

  UgsReport rep;
  rep.radii = radii;
  double worst_growth = 0.0;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const std::vector<State> xs = samples_at_distance(sys, set, anchor, radii[ri], opts.samples_per_radius, ri * 7919);
    struct Sweep {
      double full = 0.0;
      double half = 0.0;
      bool finite = true;
      std::optional<TrajectoryWitness> peak;
    };
    std::vector<Sweep> sweeps(xs.size());
    detail::parallel_for(xs.size(), 0, [&](std::size_t i) {
      std::vector<PathLevel> levels;
      ExtendedSolution tree;
      ClassicalRun run;
      if (opts.extended) {
        tree = simulate_extended(sys, xs[i], cfg, opts.ext);
        for (const auto& b : tree.branches) levels.push_back({&b.run, b.k});
      } else {
        run = simulate(sys, xs[i], cfg);
        levels.push_back({&run, 0});
      }
      double t_end = 0.0;
      for (const auto& lv : levels) {
        t_end = std::max(t_end, lv.run->final_time());
        if (lv.run->termination == Termination::EvalError) sweeps[i].finite = false;
      }
      const double t_half = 0.5 * t_end;
      for (const auto& lv : levels)
        for_each_point(*lv.run, lv.k, [&](const Sample& s, std::size_t j, std::size_t k) {
          const double d = distance(sys, set, s.x);
          if (!std::isfinite(d)) sweeps[i].finite = false;
          if (d > sweeps[i].full) {
            sweeps[i].full = d;
            sweeps[i].peak = witness_at(xs[i], s, j, k, d);
          }
          if (s.t <= t_half) sweeps[i].half = std::max(sweeps[i].half, d);
        });
    });
    double m = 0.0;
    for (const auto& s : sweeps) {
      m = std::max(m, s.full);
      if (!s.finite) rep.finite = false;
      if (s.full > (1.0 + opts.growth_tol) * s.half + 1e-9) {
        rep.bounded_growth = false;
        const double g = s.full / std::max(s.half, 1e-300);
        if (g > worst_growth) {
          worst_growth = g;
          rep.witness = s.peak;
        }
      }
    }
    rep.envelope.push_back(m);
    rep.counts.push_back(xs.size());
    if (xs.empty() || !std::isfinite(m)) rep.finite = false;
  }

  const double m0 = rep.envelope[0];
  if (rep.radii.size() >= 2 && m0 > opts.vanish_floor) {
    const double m1 = rep.envelope[1];
    rep.slope = std::log(m1 / m0) / std::log(rep.radii[1] / rep.radii[0]);
    rep.vanishing = rep.slope >= opts.min_slope;
  } else {
    rep.vanishing = m0 <= opts.vanish_floor;
  }
  rep.pass = rep.finite && rep.bounded_growth && rep.vanishing;
  return rep;
}

}  // namespace hyzeno
