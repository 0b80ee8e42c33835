#include "hyzeno/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hyzeno/error.hpp"

namespace hyzeno {

void SimConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (!(step > 0.0) || !std::isfinite(step)) bad(fmt::format("step must be positive, got {}", step));
  if (!(event_tol > 0.0)) bad(fmt::format("event tolerance must be positive, got {}", event_tol));
  if (!(horizon > 0.0)) bad(fmt::format("horizon must be positive, got {}", horizon));
  if (max_jumps == 0) bad("max_jumps must be positive");
  if (zeno_window < 3) bad(fmt::format("zeno window must be at least 3, got {}", zeno_window));
  if (!(zeno_ratio_tol > 0.0 && zeno_ratio_tol < 1.0)) bad("zeno ratio tolerance must lie in (0, 1)");
  if (!(zeno_time_eps > 0.0)) bad("zeno time epsilon must be positive");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Horizon: return "Horizon";
    case Termination::ZenoDetected: return "ZenoDetected";
    case Termination::MaxJumps: return "MaxJumps";
    case Termination::Deadlock: return "Deadlock";
    case Termination::EvalError: return "EvalError";
  }
  return "?";
}

namespace {

enum class PointClass { Flowing, Hit, Out };

PointClass classify(const SystemData& sys, std::span<const double> x, bool jump_priority) {
  const bool in_d = in_jump_set(sys, x);
  if (jump_priority && in_d) return PointClass::Hit;
  if (in_flow_set(sys, x)) return PointClass::Flowing;
  return in_d ? PointClass::Hit : PointClass::Out;
}

void require_finite(std::span<const double> x, double t) {
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorCode::IntegrationError, fmt::format("non-finite state at t = {}", t));
}

// Classical RK4 step of size h from x.
State rk4(const SystemData& sys, const State& x, double h) {
  const std::size_t n = x.size();
  State k1(n), k2(n), k3(n), k4(n), tmp(n);
  flow_into(sys, x, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  flow_into(sys, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  flow_into(sys, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
  flow_into(sys, tmp, k4);
  State out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

constexpr int kMaxBisections = 200;

}  // namespace

FlowResult flow_segment(const SystemData& sys, std::span<const double> x0, double t0, const SimConfig& cfg) {
  FlowResult res;
  State x(x0.begin(), x0.end());
  double t = t0;
  res.samples.push_back({t, x});

  while (true) {
    const double remaining = cfg.horizon - t;
    const double sliver = 1e-12 * std::max(1.0, std::abs(cfg.horizon));
    if (remaining <= 0.0) {
      res.exit = FlowExitKind::HorizonReached;
      return res;
    }
    // Absorb a rounding-sized remainder into the last step so runs end exactly at the horizon.
    const double h = remaining - cfg.step <= sliver ? remaining : cfg.step;
    State xn = rk4(sys, x, h);
    require_finite(xn, t + h);
    const PointClass c = classify(sys, xn, cfg.jump_priority);
    if (c == PointClass::Flowing) {
      t = (h == remaining) ? cfg.horizon : t + h;
      x = std::move(xn);
      res.samples.push_back({t, x});
      continue;
    }

    // The guard (or the boundary of C ∪ D) lies inside (t, t + h]. Bisect on
    // the substep length; `hi` always ends on a Hit point once one is found.
    double lo = 0.0;
    double hi = h;
    bool hi_hit = (c == PointClass::Hit);
    State x_hi = std::move(xn);
    for (int it = 0; it < kMaxBisections && (hi - lo > cfg.event_tol || !hi_hit); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      State xm = rk4(sys, x, mid);
      require_finite(xm, t + mid);
      const PointClass cm = classify(sys, xm, cfg.jump_priority);
      if (cm == PointClass::Flowing) {
        lo = mid;
      } else {
        hi = mid;
        hi_hit = (cm == PointClass::Hit);
        x_hi = std::move(xm);
      }
    }
    if (hi_hit) {
      res.samples.push_back({t + hi, std::move(x_hi)});
      res.exit = FlowExitKind::EnteredD;
    } else {
      if (lo > 0.0) res.samples.push_back({t + lo, rk4(sys, x, lo)});
      res.exit = FlowExitKind::LeftCAndD;
    }
    return res;
  }
}

State apply_jump(const SystemData& sys, std::span<const double> x) {
  if (!in_jump_set(sys, x))
    throw Error(ErrorCode::NotInJumpSet, fmt::format("state is not in the jump set of '{}'", sys.name));
  return jump(sys, x);
}

std::optional<ZenoCertificate> detect_zeno(std::span<const double> jump_times, const SimConfig& cfg) {
  const std::size_t m = cfg.zeno_window;
  if (m < 2 || jump_times.size() < m + 1) return std::nullopt;
  const auto tail = jump_times.subspan(jump_times.size() - (m + 1));

  ZenoCertificate cert;
  for (std::size_t i = 0; i + 1 < tail.size(); ++i) {
    const double gap = tail[i + 1] - tail[i];
    if (!(gap > 0.0)) return std::nullopt;
    cert.gaps.push_back(gap);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cert.gaps.size(); ++i) {
    cert.ratios.push_back(cert.gaps[i + 1] / cert.gaps[i]);
    sum += cert.ratios.back();
  }
  const double r = sum / static_cast<double>(cert.ratios.size());
  for (double q : cert.ratios)
    if (std::abs(q - r) > cfg.zeno_ratio_tol) return std::nullopt;
  if (!(r > 0.0) || r > 1.0 - cfg.zeno_ratio_tol) return std::nullopt;

  cert.ratio = r;
  cert.t_last = tail.back();
  cert.tau_hat = cert.t_last + cert.gaps.back() * r / (1.0 - r);
  return cert;
}

std::vector<double> ClassicalRun::jump_times() const {
  std::vector<double> out;
  out.reserve(jumps.size());
  for (const auto& j : jumps) out.push_back(j.t);
  return out;
}

ClassicalDomain ClassicalRun::domain() const {
  ClassicalDomain d;
  d.reserve(segments.size());
  for (const auto& s : segments) d.push_back({s.t_start(), s.t_end(), s.j});
  return d;
}

ExtendedHybridTimeDomain ClassicalRun::extended_domain(std::size_t k) const {
  ExtendedHybridTimeDomain d;
  for (const auto& s : segments) d.append({s.t_start(), s.t_end(), s.j, k});
  if (termination == Termination::ZenoDetected) d.certify_level(k, LevelCompletion::Zeno);
  if (termination == Termination::Horizon) d.certify_level(k, LevelCompletion::UnboundedFlow);
  return d;
}

ClassicalRun simulate(const SystemData& sys, std::span<const double> x0, const SimConfig& cfg, double t0) {
  cfg.validate();
  if (x0.size() != sys.dim)
    throw Error(ErrorCode::InvalidInitialCondition,
                fmt::format("initial state has {} components, system has dimension {}", x0.size(), sys.dim));
  for (double v : x0)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInitialCondition, "initial state is not finite");
  if (!in_flow_set(sys, x0) && !in_jump_set(sys, x0))
    throw Error(ErrorCode::InvalidInitialCondition, "initial state lies outside C ∪ D");

  ClassicalRun run;
  run.x0.assign(x0.begin(), x0.end());
  run.t0 = t0;
  run.segments.push_back({0, {{t0, run.x0}}});
  std::vector<double> times;

  try {
    while (true) {
      ArcSegment& seg = run.segments.back();
      const double t = seg.samples.back().t;
      const State x = seg.samples.back().x;
      const PointClass c = classify(sys, x, cfg.jump_priority);

      if (c == PointClass::Hit) {
        if (run.jumps.size() >= cfg.max_jumps) {
          run.termination = Termination::MaxJumps;
          break;
        }
        State post = apply_jump(sys, x);
        require_finite(post, t);
        const std::size_t j = seg.j;
        run.jumps.push_back({t, j, x, post});
        run.segments.push_back({j + 1, {{t, std::move(post)}}});
        times.push_back(t);
        if (auto cert = detect_zeno(times, cfg); cert && cert->tau_hat - cert->t_last <= cfg.zeno_time_eps) {
          run.zeno = std::move(cert);
          run.termination = Termination::ZenoDetected;
          break;
        }
        continue;
      }
      if (c == PointClass::Out) {
        run.termination = Termination::Deadlock;
        run.message = "state left C ∪ D";
        break;
      }
      if (t >= cfg.horizon) {
        run.termination = Termination::Horizon;
        break;
      }

      FlowResult fr = flow_segment(sys, x, t, cfg);
      seg.samples.insert(seg.samples.end(), std::make_move_iterator(fr.samples.begin() + 1),
                         std::make_move_iterator(fr.samples.end()));
      if (fr.exit == FlowExitKind::HorizonReached) {
        run.termination = Termination::Horizon;
        break;
      }
      if (fr.exit == FlowExitKind::LeftCAndD) {
        run.termination = Termination::Deadlock;
        run.message = "flow left C ∪ D without reaching D";
        break;
      }
    }
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::DivisionByZero:
      case ErrorCode::DomainError:
      case ErrorCode::IntegrationError:
        run.termination = Termination::EvalError;
        run.message = e.what();
        break;
      default: throw;
    }
  }
  return run;
}

}  // namespace hyzeno
