#include "hyzeno/report_io.hpp"

#include <cmath>

#include <json.hpp>

namespace hyzeno {
namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

Json vec(const State& x) {
  Json a = Json::array();
  for (double v : x) a.push_back(num(v));
  return a;
}

Json margin(const Margin& m) {
  return Json{{"inequality", m.name},
              {"worst_slack", num(m.worst)},
              {"evaluated", m.evaluated},
              {"witness", m.witness.empty() ? Json(nullptr) : vec(m.witness)}};
}

Json witness(const std::optional<TrajectoryWitness>& w) {
  if (!w) return nullptr;
  return Json{{"x0", vec(w->x0)}, {"x", vec(w->x)}, {"t", w->t}, {"j", w->j}, {"k", w->k}, {"value", num(w->value)}};
}

Json lyapunov(const LyapunovReport& r) {
  Json cex = Json::array();
  for (const auto& c : r.counterexamples)
    cex.push_back(Json{{"inequality", c.inequality}, {"x", vec(c.x)}, {"slack", num(c.slack)}});
  return Json{{"pass", r.pass},
              {"samples", r.samples},
              {"in_flow_set", r.in_flow_set},
              {"in_jump_set", r.in_jump_set},
              {"outside", r.outside},
              {"eval_errors", r.eval_errors},
              {"margins", Json::array({margin(r.sandwich_lower), margin(r.sandwich_upper), margin(r.flow_decrease),
                                       margin(r.jump_decrease)})},
              {"comparison_issues", r.comparison_issues},
              {"counterexamples", std::move(cex)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string to_json(const LyapunovReport& rep) { return dump(lyapunov(rep)); }

std::string to_json(const SfpiReport& rep) {
  return dump(Json{{"pass", rep.pass}, {"max_distance", num(rep.max_distance)}, {"witness", witness(rep.witness)}});
}

std::string to_json(const AttractivityReport& rep) {
  return dump(Json{{"pass", rep.pass},
                   {"T", num(rep.T)},
                   {"K", rep.K},
                   {"undecided", rep.undecided},
                   {"message", rep.message},
                   {"witness", witness(rep.witness)}});
}

std::string to_json(const UgsReport& rep) {
  Json env = Json::array();
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    env.push_back(Json{{"r", rep.radii[i]}, {"m", num(rep.envelope[i])}, {"samples", rep.counts[i]}});
  return dump(Json{{"pass", rep.pass},
                   {"finite", rep.finite},
                   {"bounded_growth", rep.bounded_growth},
                   {"vanishing", rep.vanishing},
                   {"slope", num(rep.slope)},
                   {"envelope", std::move(env)},
                   {"witness", witness(rep.witness)}});
}

std::string to_json(const NarrowingReport& rep) {
  Json stages = Json::array();
  for (const auto& s : rep.stages)
    stages.push_back(Json{{"stage", s.index},
                          {"lyapunov", lyapunov(s.lyapunov)},
                          {"restricted_jump_samples", s.restricted_jump_samples},
                          {"nesting_samples", s.nesting_samples},
                          {"runs", s.runs},
                          {"zeno_runs", s.zeno_runs},
                          {"reaching_runs", s.reaching_runs},
                          {"failed_runs", s.failed_runs},
                          {"max_omega_distance", num(s.max_omega_distance)},
                          {"witness", witness(s.witness)},
                          {"notes", s.notes}});
  return dump(Json{{"verdict", std::string(to_string(rep.verdict))},
                   {"K", rep.K},
                   {"failed_stage", rep.failed_stage ? Json(*rep.failed_stage) : Json(nullptr)},
                   {"message", rep.message},
                   {"stages", std::move(stages)}});
}

}  // namespace hyzeno
