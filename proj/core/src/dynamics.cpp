#include "hyzeno/dynamics.hpp"

#include <array>

#include <fmt/format.h>

#include "hyzeno/error.hpp"
#include "hyzeno/system_spec.hpp"

namespace hyzeno {

EvalEnv SystemData::env(std::span<const double> x) const {
  EvalEnv e;
  e.state = x;
  e.params = param_values;
  e.eps_eq = eps_eq;
  return e;
}

ParseContext SystemData::parse_context() const {
  ParseContext ctx;
  ctx.state_dim = dim;
  ctx.params = param_names;
  return ctx;
}

void SystemData::validate() const {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::DimensionMismatch, fmt::format("system '{}': {}", name, what));
  };
  if (dim == 0) fail("dimension must be positive");
  if (param_names.size() != param_values.size()) fail("parameter names and values differ in length");
  if (!flow_set.valid() || !flow_set.is_bool()) fail("flow set must be a boolean expression");
  if (!jump_set.valid() || !jump_set.is_bool()) fail("jump set must be a boolean expression");
  if (flow_map.size() != dim) fail(fmt::format("flow map has {} entries, expected {}", flow_map.size(), dim));
  if (jump_map.size() != dim) fail(fmt::format("jump map has {} entries, expected {}", jump_map.size(), dim));
  std::vector<const Expr*> all{&flow_set, &jump_set};
  for (const auto& e : flow_map) all.push_back(&e);
  for (const auto& e : jump_map) all.push_back(&e);
  for (const Expr* e : all) {
    if (!e->valid()) fail("missing expression");
    if (state_arity(*e) > dim) fail("expression references a state beyond the dimension");
    if (input_arity(*e) > 0) fail("expression references an input");
  }
  for (const auto& e : flow_map)
    if (!e.is_real()) fail("flow map entries must be real");
  for (const auto& e : jump_map)
    if (!e.is_real()) fail("jump map entries must be real");
}

namespace {

void check_size(const SystemData& sys, std::span<const double> x) {
  if (x.size() != sys.dim)
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("state has {} components, system '{}' has dimension {}", x.size(), sys.name, sys.dim));
}

}  // namespace

bool in_flow_set(const SystemData& sys, std::span<const double> x) {
  check_size(sys, x);
  return eval_bool(sys.flow_set, sys.env(x));
}

bool in_jump_set(const SystemData& sys, std::span<const double> x) {
  check_size(sys, x);
  return eval_bool(sys.jump_set, sys.env(x));
}

void flow_into(const SystemData& sys, std::span<const double> x, std::span<double> out) {
  check_size(sys, x);
  const EvalEnv env = sys.env(x);
  for (std::size_t i = 0; i < sys.dim; ++i) out[i] = eval_real(sys.flow_map[i], env);
}

State flow(const SystemData& sys, std::span<const double> x) {
  State out(sys.dim);
  flow_into(sys, x, out);
  return out;
}

State jump(const SystemData& sys, std::span<const double> x) {
  check_size(sys, x);
  const EvalEnv env = sys.env(x);
  State out(sys.dim);
  for (std::size_t i = 0; i < sys.dim; ++i) out[i] = eval_real(sys.jump_map[i], env);
  return out;
}

// -- built-in scenarios --------------------------------------------------------

namespace {

struct Scenario {
  std::string_view name;
  std::string_view description;
};

constexpr std::array<Scenario, 3> kScenarios{{
    {"bouncing_ball", "single bouncing ball, state (height, velocity)"},
    {"two_balls", "two independent bouncing balls, state (h1, v1, h2, v2)"},
    {"example3", "bouncing ball with a decaying sign-flipping third state"},
}};

// Ball whose height is x<h> and velocity x<v>.
std::string ball_flow_set(int h, int v) {
  return fmt::format("x{0} > 0 || (x{0} == 0 && x{1} >= 0)", h, v);
}
std::string ball_jump_set(int h, int v) { return fmt::format("x{0} == 0 && x{1} < 0", h, v); }
std::string ball_gamma(int h, int v) { return fmt::format("-if(x{0} == 0 && x{1} == 0, 0, g)", h, v); }

SystemSpec scenario_spec(std::string_view name, const ScenarioParams& p) {
  SystemSpec s;
  s.name = std::string(name);
  s.params = {{"lambda", p.lambda}, {"g", p.gravity}};
  if (name == "bouncing_ball") {
    s.dim = 2;
    s.flow_set = ball_flow_set(1, 2);
    s.jump_set = ball_jump_set(1, 2);
    s.flow_map = {"x2", ball_gamma(1, 2)};
    s.jump_map = {"x1", "-lambda*x2"};
  } else if (name == "two_balls") {
    s.dim = 4;
    s.flow_set = fmt::format("({}) && ({})", ball_flow_set(1, 2), ball_flow_set(3, 4));
    s.jump_set = fmt::format("({}) || ({})", ball_jump_set(1, 2), ball_jump_set(3, 4));
    s.flow_map = {"x2", ball_gamma(1, 2), "x4", ball_gamma(3, 4)};
    s.jump_map = {"x1", fmt::format("if({}, -lambda*x2, x2)", ball_jump_set(1, 2)), "x3",
                  fmt::format("if({}, -lambda*x4, x4)", ball_jump_set(3, 4))};
  } else if (name == "example3") {
    s.dim = 3;
    s.flow_set = ball_flow_set(1, 2);
    s.jump_set = ball_jump_set(1, 2);
    s.flow_map = {"x2", ball_gamma(1, 2), "-x3"};
    s.jump_map = {"x1", "-lambda*x2", "-x3"};
  }
  return s;
}

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& s : kScenarios) out.emplace_back(s.name);
  return out;
}

std::string_view scenario_description(std::string_view name) {
  for (const auto& s : kScenarios)
    if (s.name == name) return s.description;
  throw Error(ErrorCode::UnknownScenario, fmt::format("unknown scenario '{}'", name));
}

SystemData builtin_scenario(std::string_view name, const ScenarioParams& params) {
  (void)scenario_description(name);
  if (!(params.lambda > 0.0 && params.lambda < 1.0))
    throw Error(ErrorCode::ParamOutOfRange, fmt::format("lambda must lie in (0, 1), got {}", params.lambda));
  if (!(params.gravity > 0.0))
    throw Error(ErrorCode::ParamOutOfRange, fmt::format("gravity must be positive, got {}", params.gravity));
  return compile_system(scenario_spec(name, params));
}

}  // namespace hyzeno
