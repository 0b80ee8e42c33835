#include "hyzeno/trajectory_io.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

namespace hyzeno {
namespace {

using Json = nlohmann::ordered_json;

// Indices of the samples kept after thinning.
std::vector<std::size_t> thin(const ArcSegment& seg, double dt) {
  std::vector<std::size_t> keep;
  const std::size_t n = seg.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || i + 1 == n || dt <= 0.0) {
      keep.push_back(i);
      continue;
    }
    if (seg.samples[i].t - seg.samples[keep.back()].t >= dt * (1.0 - 1e-9)) keep.push_back(i);
  }
  return keep;
}

Json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

Json vec(const State& x) {
  Json a = Json::array();
  for (double v : x) a.push_back(number_or_string(v));
  return a;
}

void csv_rows(std::string& out, const ClassicalRun& run, std::size_t k, std::size_t branch_id, std::size_t& seg_id,
              const ExportOptions& opts) {
  for (const auto& seg : run.segments) {
    for (std::size_t i : thin(seg, opts.sample_dt)) {
      const Sample& s = seg.samples[i];
      out += fmt::format("{},{},{},{},{}", format_double(s.t), seg.j, k, seg_id, branch_id);
      for (double v : s.x) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
    ++seg_id;
  }
}

std::string csv_header(std::size_t dim) {
  std::string h = "t,j,k,seg_id,branch_id";
  for (std::size_t i = 1; i <= dim; ++i) h += fmt::format(",x{}", i);
  return h + "\n";
}

Json zeno_json(const ClassicalRun& run) {
  if (!run.zeno) return nullptr;
  const auto& z = *run.zeno;
  return Json{{"tau_hat", z.tau_hat}, {"ratio", z.ratio}, {"t_last", z.t_last}, {"gaps", z.gaps}, {"ratios", z.ratios}};
}

Json run_json(const ClassicalRun& run, std::size_t k, std::size_t& seg_id, const ExportOptions& opts) {
  Json j;
  j["termination"] = std::string(to_string(run.termination));
  if (!run.message.empty()) j["message"] = run.message;
  j["t0"] = run.t0;
  j["x0"] = vec(run.x0);
  j["zeno"] = zeno_json(run);
  j["final_time"] = run.final_time();
  j["final_state"] = vec(run.final_state());
  Json segs = Json::array();
  for (const auto& seg : run.segments) {
    Json samples = Json::array();
    for (std::size_t i : thin(seg, opts.sample_dt)) {
      Json row = Json::array({seg.samples[i].t});
      for (double v : seg.samples[i].x) row.push_back(number_or_string(v));
      samples.push_back(std::move(row));
    }
    segs.push_back(Json{{"seg_id", seg_id++},
                        {"j", seg.j},
                        {"k", k},
                        {"t_start", seg.t_start()},
                        {"t_end", seg.t_end()},
                        {"samples", std::move(samples)}});
  }
  j["segments"] = std::move(segs);
  Json jumps = Json::array();
  for (const auto& e : run.jumps) jumps.push_back(Json{{"t", e.t}, {"j", e.j}, {"pre", vec(e.pre)}, {"post", vec(e.post)}});
  j["jumps"] = std::move(jumps);
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string run_to_csv(const ClassicalRun& run, const ExportOptions& opts) {
  std::string out = csv_header(run.x0.size());
  std::size_t seg_id = 0;
  csv_rows(out, run, 0, 0, seg_id, opts);
  return out;
}

std::string extended_to_csv(const ExtendedSolution& sol, const ExportOptions& opts) {
  std::string out = csv_header(sol.branches.empty() ? 0 : sol.branches.front().start.size());
  std::size_t seg_id = 0;
  for (const auto& b : sol.branches) csv_rows(out, b.run, b.k, b.id, seg_id, opts);
  return out;
}

std::string run_to_json(const ClassicalRun& run, const ExportOptions& opts) {
  std::size_t seg_id = 0;
  Json j = run_json(run, 0, seg_id, opts);
  Json dom = Json::array();
  for (const auto& s : run.domain()) dom.push_back(Json::array({s.t_start, s.t_end, s.j, 0}));
  j["domain"] = std::move(dom);
  return j.dump(2) + "\n";
}

std::string extended_to_json(const ExtendedSolution& sol, const ExportOptions& opts) {
  Json doc;
  doc["budget_exceeded"] = sol.budget_exceeded;
  Json branches = Json::array();
  std::size_t seg_id = 0;
  for (const auto& b : sol.branches) {
    Json jb;
    jb["branch_id"] = b.id;
    jb["parent"] = b.parent ? Json(*b.parent) : Json(nullptr);
    jb["k"] = b.k;
    jb["t_start"] = b.t_start;
    jb["start"] = vec(b.start);
    jb["deadlock"] = b.deadlock;
    if (b.omega) {
      Json pts = Json::array();
      for (const auto& p : b.omega->points) pts.push_back(vec(p));
      jb["omega"] = Json{{"points", std::move(pts)}, {"period", b.omega->period}, {"residual", b.omega->residual}};
    } else {
      jb["omega"] = nullptr;
    }
    if (!b.omega_error.empty()) jb["omega_error"] = b.omega_error;
    jb["children"] = b.children;
    jb["run"] = run_json(b.run, b.k, seg_id, opts);
    branches.push_back(std::move(jb));
  }
  doc["branches"] = std::move(branches);
  Json paths = Json::array();
  for (std::size_t leaf : sol.leaves()) {
    Json events = Json::array();
    for (const auto& [k, tau] : sol.zeno_events(leaf)) events.push_back(Json{{"k", k}, {"tau_hat", tau}});
    const auto dom = sol.path_domain(leaf);
    Json d = Json::array();
    for (const auto& s : dom.segments()) d.push_back(Json::array({s.t_start, s.t_end, s.j, s.k}));
    paths.push_back(Json{{"leaf", leaf},
                         {"branches", sol.path(leaf)},
                         {"zeno_events", std::move(events)},
                         {"sup_zeno", dom.suprema().zeno},
                         {"domain", std::move(d)}});
  }
  doc["paths"] = std::move(paths);
  return doc.dump(2) + "\n";
}

}  // namespace hyzeno
