#include "hyzeno/interconnect.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "hyzeno/error.hpp"

namespace hyzeno {
namespace {

Expr parse_field(const std::string& text, const ParseContext& ctx, const std::string& field) {
  try {
    return parse_expr(text, ctx);
  } catch (const ParseError& e) {
    throw ParseError(e.code(), e.position(), fmt::format("in field '{}': {}", field, e.reason()));
  }
}

[[noreturn]] void mismatch(const std::string& msg) { throw Error(ErrorCode::DimensionMismatch, msg); }

// Rewrites an expression of one subsystem into the composite state space.
struct Embedding {
  std::size_t state_offset = 0;
  const std::vector<Expr>* inputs = nullptr;  // already embedded
  std::vector<std::size_t> param_index;       // local -> composite parameter index
  const std::vector<std::string>* param_names = nullptr;

  Expr operator()(const Expr& e) const {
    Substitution sub;
    sub.state = [this](std::size_t i) { return Expr::state(state_offset + i); };
    sub.input = [this](std::size_t i) {
      if (!inputs || i >= inputs->size()) mismatch(fmt::format("input u{} has no source", i + 1));
      return (*inputs)[i];
    };
    sub.param = [this](std::size_t i, const std::string&) {
      const std::size_t c = param_index.at(i);
      return Expr::param(c, (*param_names)[c]);
    };
    return substitute(e, sub);
  }
};

}  // namespace

Subsystem compile_subsystem(const SystemSpec& spec) {
  if (spec.dim == 0) throw Error(ErrorCode::SchemaError, "field 'dim' must be positive");
  if (spec.flow_map.size() != spec.dim || spec.jump_map.size() != spec.dim)
    throw Error(ErrorCode::SchemaError,
                fmt::format("maps must have {} entries (flow_map has {}, jump_map has {})", spec.dim,
                            spec.flow_map.size(), spec.jump_map.size()));
  Subsystem s;
  s.name = spec.name;
  s.dim = spec.dim;
  s.input_dim = spec.input_dim;
  for (const auto& [k, v] : spec.params) {
    if (std::find(s.param_names.begin(), s.param_names.end(), k) != s.param_names.end())
      throw Error(ErrorCode::SchemaError, fmt::format("duplicate parameter '{}'", k));
    s.param_names.push_back(k);
    s.param_values.push_back(v);
  }
  ParseContext ctx;
  ctx.state_dim = s.dim;
  ctx.input_dim = s.input_dim;
  ctx.params = s.param_names;
  s.flow_set = parse_field(spec.flow_set, ctx, "flow_set");
  s.jump_set = parse_field(spec.jump_set, ctx, "jump_set");
  if (!s.flow_set.is_bool() || !s.jump_set.is_bool())
    throw Error(ErrorCode::SchemaError, "flow_set and jump_set must be boolean expressions");
  for (std::size_t i = 0; i < s.dim; ++i) {
    s.flow_map.push_back(parse_field(spec.flow_map[i], ctx, fmt::format("flow_map[{}]", i)));
    s.jump_map.push_back(parse_field(spec.jump_map[i], ctx, fmt::format("jump_map[{}]", i)));
    if (!s.flow_map.back().is_real() || !s.jump_map.back().is_real())
      throw Error(ErrorCode::SchemaError, "map entries must be real-valued");
  }
  return s;
}

Subsystem load_subsystem(std::string_view json_text) { return compile_subsystem(parse_system_spec(json_text)); }

Subsystem subsystem_from_system(const SystemData& sys) {
  Subsystem s;
  s.name = sys.name;
  s.dim = sys.dim;
  s.param_names = sys.param_names;
  s.param_values = sys.param_values;
  s.flow_set = sys.flow_set;
  s.jump_set = sys.jump_set;
  s.flow_map = sys.flow_map;
  s.jump_map = sys.jump_map;
  return s;
}

OutputMap output_map_from_strings(const std::vector<std::string>& exprs, const Subsystem& owner) {
  ParseContext ctx;
  ctx.state_dim = owner.dim;
  ctx.params = owner.param_names;
  OutputMap h;
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    h.outputs.push_back(parse_field(exprs[i], ctx, fmt::format("outputs[{}]", i)));
    if (!h.outputs.back().is_real()) throw Error(ErrorCode::SchemaError, "outputs must be real-valued");
  }
  return h;
}

OutputMap parse_output_map(std::string_view json_text, const Subsystem& owner) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("outputs") || !doc["outputs"].is_array())
    throw Error(ErrorCode::SchemaError, "output map must be an object with an 'outputs' array");
  std::vector<std::string> exprs;
  for (const auto& item : doc["outputs"]) {
    if (!item.is_string()) throw Error(ErrorCode::SchemaError, "outputs must be expression strings");
    exprs.push_back(item.get<std::string>());
  }
  return output_map_from_strings(exprs, owner);
}

SystemData interconnect(const Subsystem& sub1, const Subsystem& sub2, const OutputMap& h1, const OutputMap& h2) {
  if (h1.outputs.size() != sub2.input_dim)
    mismatch(fmt::format("h1 has {} outputs but '{}' takes {} inputs", h1.outputs.size(), sub2.name, sub2.input_dim));
  if (h2.outputs.size() != sub1.input_dim)
    mismatch(fmt::format("h2 has {} outputs but '{}' takes {} inputs", h2.outputs.size(), sub1.name, sub1.input_dim));
  for (const auto& e : h1.outputs)
    if (state_arity(e) > sub1.dim || input_arity(e) > 0) mismatch("h1 must depend on the state of the first subsystem only");
  for (const auto& e : h2.outputs)
    if (state_arity(e) > sub2.dim || input_arity(e) > 0) mismatch("h2 must depend on the state of the second subsystem only");

  SystemData sys;
  sys.name = sub1.name + "_" + sub2.name;
  sys.dim = sub1.dim + sub2.dim;

  Embedding e1, e2;
  e1.state_offset = 0;
  e2.state_offset = sub1.dim;
  e1.param_names = e2.param_names = &sys.param_names;
  for (std::size_t i = 0; i < sub1.param_names.size(); ++i) {
    sys.param_names.push_back(sub1.param_names[i]);
    sys.param_values.push_back(sub1.param_values[i]);
    e1.param_index.push_back(i);
  }
  for (std::size_t i = 0; i < sub2.param_names.size(); ++i) {
    const std::string& name = sub2.param_names[i];
    const double value = sub2.param_values[i];
    auto it = std::find(sys.param_names.begin(), sys.param_names.end(), name);
    if (it != sys.param_names.end() && sys.param_values[it - sys.param_names.begin()] == value) {
      e2.param_index.push_back(static_cast<std::size_t>(it - sys.param_names.begin()));
      continue;
    }
    std::string fresh = name;
    for (int n = 2; std::find(sys.param_names.begin(), sys.param_names.end(), fresh) != sys.param_names.end(); ++n)
      fresh = fmt::format("{}_{}", name, n);
    e2.param_index.push_back(sys.param_names.size());
    sys.param_names.push_back(fresh);
    sys.param_values.push_back(value);
  }

  // Output maps are evaluated on their owner's state: h1 on x1 feeds sub2, h2 on x2 feeds sub1.
  std::vector<Expr> u1, u2;
  for (const auto& e : h2.outputs) u1.push_back(e2(e));
  for (const auto& e : h1.outputs) u2.push_back(e1(e));
  e1.inputs = &u1;
  e2.inputs = &u2;

  const Expr c1 = e1(sub1.flow_set), c2 = e2(sub2.flow_set);
  const Expr d1 = e1(sub1.jump_set), d2 = e2(sub2.jump_set);
  sys.flow_set = Expr::binary(ExprOp::And, c1, c2);
  sys.jump_set = Expr::binary(ExprOp::Or, d1, d2);
  for (const auto& f : sub1.flow_map) sys.flow_map.push_back(e1(f));
  for (const auto& f : sub2.flow_map) sys.flow_map.push_back(e2(f));
  for (std::size_t i = 0; i < sub1.dim; ++i)
    sys.jump_map.push_back(Expr::conditional(d1, e1(sub1.jump_map[i]), Expr::state(i)));
  for (std::size_t i = 0; i < sub2.dim; ++i)
    sys.jump_map.push_back(Expr::conditional(d2, e2(sub2.jump_map[i]), Expr::state(sub1.dim + i)));
  sys.validate();
  return sys;
}

SystemData vacuous_interconnection(const Subsystem& sub1, const Subsystem& sub2) {
  if (sub1.input_dim != 0 || sub2.input_dim != 0)
    throw Error(ErrorCode::NotInputFree, "vacuous interconnection requires input-free subsystems");
  return interconnect(sub1, sub2, {}, {});
}

}  // namespace hyzeno
