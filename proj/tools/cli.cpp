#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hyzeno/error.hpp"
#include "hyzeno/interconnect.hpp"
#include "hyzeno/narrowing.hpp"
#include "hyzeno/prolongation.hpp"
#include "hyzeno/report_io.hpp"
#include "hyzeno/simulator.hpp"
#include "hyzeno/stability.hpp"
#include "hyzeno/system_spec.hpp"
#include "hyzeno/trajectory_io.hpp"

namespace hyzeno::cli {
namespace {

// Carries the exit code out of a command.
struct Exit {
  int code;
  std::string message;
};

struct SystemOptions {
  std::string system_path;
  std::string scenario;
  double lambda = 0.5;
  double gravity = 9.81;
};

struct SimOptions {
  std::string x0;
  double horizon = 10.0;
  double step = 1e-3;
  std::size_t max_jumps = 10000;
  std::size_t zeno_window = 8;
  std::string out;
  std::string format = "csv";
  std::optional<double> sample_dt;
};

struct ExtOptions {
  std::size_t max_zeno = 3;
  std::size_t branch_budget = 16;
};

struct CheckOptions {
  std::string cert;
  std::string chain;
  std::string out;
  std::size_t samples = 0;  // 0 keeps the file's grid size
  std::size_t seed = 0;
  double horizon = 10.0;
  double step = 1e-3;
  // attractivity / ugs
  std::string x0_list;
  double eps = 0.05;
  double r = 1.0;
  bool extended = false;
  std::size_t max_zeno = 3;
  std::string radii = "0.01,0.1,1";
  std::size_t per_radius = 16;
};

void add_system_options(CLI::App* cmd, SystemOptions& o) {
  auto* sys = cmd->add_option("--system", o.system_path, "system spec JSON file");
  auto* sc = cmd->add_option("--scenario", o.scenario, "built-in scenario name");
  sys->excludes(sc);
  cmd->add_option("--lambda", o.lambda, "restitution coefficient for built-in scenarios");
  cmd->add_option("--gravity", o.gravity, "gravity for built-in scenarios");
}

void add_sim_options(CLI::App* cmd, SimOptions& o, bool need_x0) {
  auto* x0 = cmd->add_option("--x0", o.x0, "initial state, comma separated");
  if (need_x0) x0->required();
  cmd->add_option("--horizon", o.horizon, "final time in seconds");
  cmd->add_option("--step", o.step, "RK4 step in seconds");
  cmd->add_option("--max-jumps", o.max_jumps, "jump budget per classical run");
  cmd->add_option("--zeno-window", o.zeno_window, "trailing intervals inspected by the Zeno test");
  cmd->add_option("--out", o.out, "trajectory output file");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--sample-dt", o.sample_dt, "spacing of exported samples (default: the step)");
}

SystemData load(const SystemOptions& o) {
  if (!o.system_path.empty()) return load_system_file(o.system_path);
  if (!o.scenario.empty()) return builtin_scenario(o.scenario, {o.lambda, o.gravity});
  throw Exit{kSpecError, "one of --system or --scenario is required"};
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(pos, end - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    double v = 0.0;
    const char* first = item.data();
    if (!item.empty() && item[0] == '+') ++first;
    const auto res = std::from_chars(first, item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw Exit{kInvalidX0, fmt::format("cannot parse '{}' as a number", item)};
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

State parse_x0(const std::string& text, const SystemData& sys) {
  State x = parse_numbers(text);
  if (x.size() != sys.dim)
    throw Exit{kInvalidX0, fmt::format("x0 has {} components, system '{}' has dimension {}", x.size(), sys.name, sys.dim)};
  return x;
}

std::vector<State> parse_x0_list(const std::string& text, const SystemData& sys) {
  std::vector<State> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse_x0(item, sys));
  return out;
}

SimConfig sim_config(const SimOptions& o) {
  SimConfig cfg;
  cfg.horizon = o.horizon;
  cfg.step = o.step;
  cfg.max_jumps = o.max_jumps;
  cfg.zeno_window = o.zeno_window;
  cfg.validate();
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Exit{kRuntimeError, fmt::format("cannot write '{}'", path)};
  f << content;
}

std::string vec_str(const State& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_double(x[i]);
  return s + ")";
}

void print_run_summary(std::ostream& out, const ClassicalRun& run) {
  out << fmt::format("termination: {}\n", to_string(run.termination));
  if (run.zeno) out << fmt::format("zeno time: {:.6f} (ratio {:.4f})\n", run.zeno->tau_hat, run.zeno->ratio);
  if (!run.message.empty()) out << fmt::format("detail: {}\n", run.message);
  out << fmt::format("jumps: {}\n", run.jumps.size());
  out << fmt::format("final: t = {:.6f}, x = {}\n", run.final_time(), vec_str(run.final_state()));
}

int cmd_simulate(const SystemOptions& so, const SimOptions& o, std::ostream& out) {
  const SystemData sys = load(so);
  const State x0 = parse_x0(o.x0, sys);
  const SimConfig cfg = sim_config(o);
  ClassicalRun run;
  try {
    run = simulate(sys, x0, cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidInitialCondition) throw Exit{kInvalidX0, e.what()};
    throw;
  }
  print_run_summary(out, run);
  if (!o.out.empty()) {
    const ExportOptions ex{o.sample_dt.value_or(cfg.step)};
    write_file(o.out, o.format == "json" ? run_to_json(run, ex) : run_to_csv(run, ex));
  }
  return run.termination == Termination::EvalError ? kRuntimeError : kOk;
}

int cmd_simulate_extended(const SystemOptions& so, const SimOptions& o, const ExtOptions& eo, std::ostream& out) {
  const SystemData sys = load(so);
  const State x0 = parse_x0(o.x0, sys);
  const SimConfig cfg = sim_config(o);
  ExtendedConfig ext;
  ext.max_zeno = eo.max_zeno;
  ext.branch_budget = eo.branch_budget;
  ExtendedSolution sol;
  try {
    sol = simulate_extended(sys, x0, cfg, ext);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidInitialCondition) throw Exit{kInvalidX0, e.what()};
    throw;
  }
  const auto leaves = sol.leaves();
  out << fmt::format("branches: {} ({} solution(s))\n", sol.branches.size(), leaves.size());
  for (const auto& b : sol.branches) {
    out << fmt::format("branch {} (k = {}, parent {}): {}", b.id, b.k, b.parent ? std::to_string(*b.parent) : "-",
                       to_string(b.run.termination));
    if (b.run.zeno) out << fmt::format(", zeno time {:.6f}", b.run.zeno->tau_hat);
    if (b.omega) out << fmt::format(", {} omega point(s)", b.omega->points.size());
    if (!b.omega_error.empty()) out << fmt::format(", omega estimate failed: {}", b.omega_error);
    out << fmt::format(", final t = {:.6f}, x = {}\n", b.run.final_time(), vec_str(b.run.final_state()));
  }
  for (std::size_t leaf : leaves) {
    const auto events = sol.zeno_events(leaf);
    std::string ev;
    for (const auto& [k, tau] : events) ev += fmt::format(" (k = {}, {:.6f})", k, tau);
    out << fmt::format("solution ending at branch {}: {} zeno event(s){}\n", leaf, events.size(), ev);
  }
  if (!o.out.empty()) {
    const ExportOptions ex{o.sample_dt.value_or(cfg.step)};
    write_file(o.out, o.format == "json" ? extended_to_json(sol, ex) : extended_to_csv(sol, ex));
  }
  if (sol.budget_exceeded) {
    out << "branch budget exceeded; the tree is partial\n";
    return kBudgetExceeded;
  }
  return kOk;
}

LyapunovCertificate load_cert(const SystemData& sys, const std::string& path) {
  if (path.empty()) throw Exit{kSpecError, "--cert is required"};
  return parse_certificate(sys, read_text_file(path));
}

SimConfig check_sim(const CheckOptions& o) {
  SimConfig cfg;
  cfg.horizon = o.horizon;
  cfg.step = o.step;
  cfg.validate();
  return cfg;
}

int finish_check(bool pass, const std::string& report, const CheckOptions& o, std::ostream& out,
                 const std::string& summary) {
  out << summary;
  if (!o.out.empty()) write_file(o.out, report);
  return pass ? kOk : kCheckFailed;
}

int cmd_check_lyapunov(const SystemOptions& so, const CheckOptions& o, std::ostream& out) {
  const SystemData sys = load(so);
  const LyapunovCertificate cert = load_cert(sys, o.cert);
  if (!cert.grid) throw Exit{kSpecError, "certificate has no 'grid'"};
  SampleSpec grid = *cert.grid;
  if (o.samples > 0) grid.count = o.samples;
  grid.seed = o.seed;
  const LyapunovReport rep = check_lyapunov(sys, cert, grid);
  std::string s = fmt::format("lyapunov: {} ({} samples, {} in C, {} in D)\n", rep.pass ? "pass" : "fail", rep.samples,
                              rep.in_flow_set, rep.in_jump_set);
  for (const Margin* m : {&rep.sandwich_lower, &rep.sandwich_upper, &rep.flow_decrease, &rep.jump_decrease})
    s += fmt::format("  {}: worst slack {}\n", m->name, m->evaluated ? format_double(m->worst) : "n/a");
  for (const auto& issue : rep.comparison_issues) s += fmt::format("  comparison function: {}\n", issue);
  if (!rep.counterexamples.empty())
    s += fmt::format("  witness: {} violated at {}\n", rep.counterexamples.front().inequality,
                     vec_str(rep.counterexamples.front().x));
  return finish_check(rep.pass, to_json(rep), o, out, s);
}

int cmd_check_narrowing(const SystemOptions& so, const CheckOptions& o, std::ostream& out) {
  const SystemData sys = load(so);
  if (o.chain.empty()) throw Exit{kSpecError, "--chain is required"};
  Chain chain = parse_chain(sys, read_text_file(o.chain));
  for (auto& st : chain.stages) {
    if (o.samples > 0) st.grid.count = o.samples;
    st.grid.seed = o.seed;
  }
  NarrowingOptions opts;
  opts.sim = check_sim(o);
  const NarrowingReport rep = sequential_narrowing(sys, chain, opts);
  std::string s = fmt::format("narrowing: {} (K = {})\n", to_string(rep.verdict), rep.K);
  for (const auto& st : rep.stages)
    s += fmt::format("  stage {}: lyapunov {}, jump-set samples {}, runs {} (zeno {}, reaching {}, failed {})\n",
                     st.index, st.lyapunov.pass ? "pass" : "fail", st.restricted_jump_samples, st.runs, st.zeno_runs,
                     st.reaching_runs, st.failed_runs);
  if (rep.verdict == NarrowingVerdict::Fail) s += fmt::format("  {}\n", rep.message);
  return finish_check(rep.verdict != NarrowingVerdict::Fail, to_json(rep), o, out, s);
}

int cmd_check_attractivity(const SystemOptions& so, const CheckOptions& o, std::ostream& out) {
  const SystemData sys = load(so);
  const LyapunovCertificate cert = load_cert(sys, o.cert);
  const std::vector<State> samples = parse_x0_list(o.x0_list, sys);
  if (samples.empty()) throw Exit{kInvalidX0, "--x0 needs at least one initial state"};
  AttractivityOptions opts;
  opts.eps = o.eps;
  opts.r = o.r;
  opts.extended = o.extended;
  opts.ext.max_zeno = o.max_zeno;
  AttractivityReport rep;
  try {
    rep = check_attractivity(sys, cert.set, samples, check_sim(o), opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BudgetExceeded) throw Exit{kBudgetExceeded, e.what()};
    throw;
  }
  std::string s = rep.pass ? fmt::format("attractivity: pass (T = {}, K = {})\n", format_double(rep.T), rep.K)
                           : fmt::format("attractivity: fail ({})\n", rep.message);
  if (rep.witness)
    s += fmt::format("  witness: from {} at t = {}, j = {}, k = {}: x = {}, distance {}\n", vec_str(rep.witness->x0),
                     format_double(rep.witness->t), rep.witness->j, rep.witness->k, vec_str(rep.witness->x),
                     format_double(rep.witness->value));
  return finish_check(rep.pass, to_json(rep), o, out, s);
}

int cmd_check_ugs(const SystemOptions& so, const CheckOptions& o, std::ostream& out) {
  const SystemData sys = load(so);
  const LyapunovCertificate cert = load_cert(sys, o.cert);
  std::vector<double> radii;
  try {
    radii = parse_numbers(o.radii);
  } catch (const Exit& e) {
    throw Exit{kSpecError, e.message};
  }
  UgsOptions opts;
  opts.samples_per_radius = o.per_radius;
  opts.extended = o.extended;
  opts.ext.max_zeno = o.max_zeno;
  const UgsReport rep = check_ugs_envelope(sys, cert.set, radii, check_sim(o), opts);
  std::string s = fmt::format("ugs envelope: {}\n", rep.pass ? "pass" : "fail");
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    s += fmt::format("  m({}) = {} over {} sample(s)\n", format_double(rep.radii[i]), format_double(rep.envelope[i]),
                     rep.counts[i]);
  s += fmt::format("  finite {}, bounded growth {}, vanishing {} (slope {})\n", rep.finite, rep.bounded_growth,
                   rep.vanishing, format_double(rep.slope));
  return finish_check(rep.pass, to_json(rep), o, out, s);
}

struct InterconnectOptions {
  std::string sub1, sub2, h1, h2, out;
};

int cmd_interconnect(const InterconnectOptions& o, std::ostream& out) {
  const Subsystem s1 = load_subsystem(read_text_file(o.sub1));
  const Subsystem s2 = load_subsystem(read_text_file(o.sub2));
  const OutputMap h1 = o.h1.empty() ? OutputMap{} : parse_output_map(read_text_file(o.h1), s1);
  const OutputMap h2 = o.h2.empty() ? OutputMap{} : parse_output_map(read_text_file(o.h2), s2);
  const SystemData sys = interconnect(s1, s2, h1, h2);
  const std::string json = system_spec_to_json(to_spec(sys));
  if (o.out.empty())
    out << json;
  else {
    write_file(o.out, json);
    out << fmt::format("wrote '{}' (dimension {})\n", o.out, sys.dim);
  }
  return kOk;
}

int cmd_scenarios(std::ostream& out) {
  for (const auto& name : scenario_names()) out << fmt::format("{:<14} {}\n", name, scenario_description(name));
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::ArityMismatch:
    case ErrorCode::TypeMismatch:
    case ErrorCode::SchemaError:
    case ErrorCode::UnknownScenario:
    case ErrorCode::ParamOutOfRange:
    case ErrorCode::InvalidConfig:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotInputFree:
    case ErrorCode::ChainNotNested:
    case ErrorCode::InvalidArgument: return kSpecError;
    case ErrorCode::InvalidInitialCondition: return kInvalidX0;
    case ErrorCode::BudgetExceeded: return kBudgetExceeded;
    default: return kRuntimeError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and stability checks for hybrid systems with Zeno behaviour", "hyzeno"};
  app.require_subcommand(1);

  SystemOptions so;
  SimOptions sim;
  ExtOptions ext;
  CheckOptions chk;
  InterconnectOptions ic;

  auto* simulate_cmd = app.add_subcommand("simulate", "classical maximal solution");
  add_system_options(simulate_cmd, so);
  add_sim_options(simulate_cmd, sim, true);

  auto* ext_cmd = app.add_subcommand("simulate-extended", "extended solution across Zeno times");
  add_system_options(ext_cmd, so);
  add_sim_options(ext_cmd, sim, true);
  ext_cmd->add_option("--max-zeno", ext.max_zeno, "largest Zeno index to construct");
  ext_cmd->add_option("--branch-budget", ext.branch_budget, "maximum number of branches");

  auto* check_cmd = app.add_subcommand("check", "stability checks");
  check_cmd->require_subcommand(1);
  auto add_check = [&](const char* name, const char* help) {
    auto* c = check_cmd->add_subcommand(name, help);
    add_system_options(c, so);
    c->add_option("--out", chk.out, "report JSON file");
    c->add_option("--samples", chk.samples, "override the grid size");
    c->add_option("--seed", chk.seed, "offset into the sampling sequence");
    c->add_option("--horizon", chk.horizon, "simulation horizon");
    c->add_option("--step", chk.step, "RK4 step");
    return c;
  };
  auto* lyap_cmd = add_check("lyapunov", "Lyapunov certificate on a sample grid");
  lyap_cmd->add_option("--cert", chk.cert, "certificate JSON")->required();
  auto* narrow_cmd = add_check("narrowing", "sequential narrowing of a chain of sets");
  narrow_cmd->add_option("--chain", chk.chain, "chain JSON")->required();
  auto* attr_cmd = add_check("attractivity", "uniform pre-attractivity from sampled initial states");
  attr_cmd->add_option("--cert", chk.cert, "certificate JSON providing the set")->required();
  attr_cmd->add_option("--x0", chk.x0_list, "initial states, ';' separated")->required();
  attr_cmd->add_option("--eps", chk.eps, "target neighbourhood radius");
  attr_cmd->add_option("--r", chk.r, "initial distance bound");
  attr_cmd->add_flag("--extended", chk.extended, "use extended solutions");
  attr_cmd->add_option("--max-zeno", chk.max_zeno, "largest Zeno index");
  auto* ugs_cmd = add_check("ugs", "stability envelope m(r)");
  ugs_cmd->add_option("--cert", chk.cert, "certificate JSON providing the set")->required();
  ugs_cmd->add_option("--radii", chk.radii, "increasing radii, comma separated");
  ugs_cmd->add_option("--per-radius", chk.per_radius, "samples per radius");
  ugs_cmd->add_flag("--extended", chk.extended, "use extended solutions");
  ugs_cmd->add_option("--max-zeno", chk.max_zeno, "largest Zeno index");

  auto* ic_cmd = app.add_subcommand("interconnect", "natural interconnection of two subsystems");
  ic_cmd->add_option("--sub1", ic.sub1, "first subsystem JSON")->required();
  ic_cmd->add_option("--sub2", ic.sub2, "second subsystem JSON")->required();
  ic_cmd->add_option("--h1", ic.h1, "output map of the first subsystem (feeds the second)");
  ic_cmd->add_option("--h2", ic.h2, "output map of the second subsystem (feeds the first)");
  ic_cmd->add_option("--out", ic.out, "composed system JSON");

  auto* sc_cmd = app.add_subcommand("scenario", "built-in scenarios");
  sc_cmd->require_subcommand(1);
  auto* sc_list = sc_cmd->add_subcommand("list", "list built-in scenarios");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kSpecError;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(so, sim, out);
    if (*ext_cmd) return cmd_simulate_extended(so, sim, ext, out);
    if (*lyap_cmd) return cmd_check_lyapunov(so, chk, out);
    if (*narrow_cmd) return cmd_check_narrowing(so, chk, out);
    if (*attr_cmd) return cmd_check_attractivity(so, chk, out);
    if (*ugs_cmd) return cmd_check_ugs(so, chk, out);
    if (*ic_cmd) return cmd_interconnect(ic, out);
    if (*sc_list) return cmd_scenarios(out);
  } catch (const Exit& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kSpecError;
}

}  // namespace hyzeno::cli
