#include "hyzeno/system_spec.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "hyzeno/error.hpp"

namespace hyzeno {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& msg) { throw Error(ErrorCode::SchemaError, msg); }

const Json& require(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) schema_error(fmt::format("missing field '{}'", key));
  return *it;
}

std::string require_string(const Json& doc, const char* key) {
  const Json& v = require(doc, key);
  if (!v.is_string()) schema_error(fmt::format("field '{}' must be a string", key));
  return v.get<std::string>();
}

std::size_t require_count(const Json& v, const char* key, bool allow_zero) {
  if (!v.is_number_integer()) schema_error(fmt::format("field '{}' must be an integer", key));
  const auto n = v.get<long long>();
  if (n < 0 || (!allow_zero && n == 0)) schema_error(fmt::format("field '{}' out of range: {}", key, n));
  return static_cast<std::size_t>(n);
}

std::vector<std::string> require_string_list(const Json& doc, const char* key) {
  const Json& v = require(doc, key);
  if (!v.is_array()) schema_error(fmt::format("field '{}' must be an array of strings", key));
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) schema_error(fmt::format("field '{}' must be an array of strings", key));
    out.push_back(item.get<std::string>());
  }
  return out;
}

bool reserved_name(const std::string& s) {
  static const char* const kFuncs[] = {"sqrt", "exp", "abs", "atan", "sin", "cos", "min", "max", "if"};
  for (const char* f : kFuncs)
    if (s == f) return true;
  if (s.size() >= 2 && (s[0] == 'x' || s[0] == 'u')) {
    bool digits = true;
    for (std::size_t i = 1; i < s.size(); ++i) digits = digits && std::isdigit(static_cast<unsigned char>(s[i]));
    if (digits) return true;
  }
  return false;
}

bool identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

Expr parse_field(const std::string& text, const ParseContext& ctx, const std::string& field) {
  try {
    return parse_expr(text, ctx);
  } catch (const ParseError& e) {
    throw ParseError(e.code(), e.position(), fmt::format("in field '{}': {}", field, e.reason()));
  }
}

}  // namespace

SystemSpec parse_system_spec(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    schema_error(fmt::format("invalid JSON: {}", e.what()));
  }
  if (!doc.is_object()) schema_error("system document must be a JSON object");

  SystemSpec s;
  s.name = require_string(doc, "name");
  s.dim = require_count(require(doc, "dim"), "dim", false);
  if (auto it = doc.find("input_dim"); it != doc.end()) s.input_dim = require_count(*it, "input_dim", true);
  if (auto it = doc.find("params"); it != doc.end()) {
    if (!it->is_object()) schema_error("field 'params' must be an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_number()) schema_error(fmt::format("parameter '{}' must be a number", key));
      s.params.emplace_back(key, value.get<double>());
    }
  }
  s.flow_set = require_string(doc, "flow_set");
  s.jump_set = require_string(doc, "jump_set");
  s.flow_map = require_string_list(doc, "flow_map");
  s.jump_map = require_string_list(doc, "jump_map");
  return s;
}

std::string system_spec_to_json(const SystemSpec& spec) {
  Json doc;
  doc["name"] = spec.name;
  doc["dim"] = spec.dim;
  if (spec.input_dim > 0) doc["input_dim"] = spec.input_dim;
  doc["params"] = Json::object();
  for (const auto& [k, v] : spec.params) doc["params"][k] = v;
  doc["flow_set"] = spec.flow_set;
  doc["jump_set"] = spec.jump_set;
  doc["flow_map"] = spec.flow_map;
  doc["jump_map"] = spec.jump_map;
  return doc.dump(2) + "\n";
}

SystemData compile_system(const SystemSpec& spec) {
  if (spec.dim == 0) schema_error("field 'dim' must be positive");
  if (spec.input_dim != 0)
    throw Error(ErrorCode::NotInputFree,
                fmt::format("system '{}' declares {} inputs; only input-free systems can be simulated", spec.name,
                            spec.input_dim));
  if (spec.flow_map.size() != spec.dim)
    schema_error(fmt::format("flow_map has {} entries but dim is {}", spec.flow_map.size(), spec.dim));
  if (spec.jump_map.size() != spec.dim)
    schema_error(fmt::format("jump_map has {} entries but dim is {}", spec.jump_map.size(), spec.dim));

  SystemData sys;
  sys.name = spec.name;
  sys.dim = spec.dim;
  for (const auto& [k, v] : spec.params) {
    if (!identifier(k) || reserved_name(k)) schema_error(fmt::format("invalid parameter name '{}'", k));
    for (const auto& existing : sys.param_names)
      if (existing == k) schema_error(fmt::format("duplicate parameter '{}'", k));
    sys.param_names.push_back(k);
    sys.param_values.push_back(v);
  }
  const ParseContext ctx = sys.parse_context();
  sys.flow_set = parse_field(spec.flow_set, ctx, "flow_set");
  sys.jump_set = parse_field(spec.jump_set, ctx, "jump_set");
  if (!sys.flow_set.is_bool()) schema_error("field 'flow_set' must be a boolean expression");
  if (!sys.jump_set.is_bool()) schema_error("field 'jump_set' must be a boolean expression");
  for (std::size_t i = 0; i < spec.dim; ++i) {
    const std::string f = fmt::format("flow_map[{}]", i);
    sys.flow_map.push_back(parse_field(spec.flow_map[i], ctx, f));
    if (!sys.flow_map.back().is_real()) schema_error(fmt::format("field '{}' must be real-valued", f));
  }
  for (std::size_t i = 0; i < spec.dim; ++i) {
    const std::string f = fmt::format("jump_map[{}]", i);
    sys.jump_map.push_back(parse_field(spec.jump_map[i], ctx, f));
    if (!sys.jump_map.back().is_real()) schema_error(fmt::format("field '{}' must be real-valued", f));
  }
  sys.validate();
  return sys;
}

SystemData load_system(std::string_view json_text) { return compile_system(parse_system_spec(json_text)); }

SystemData load_system_file(const std::filesystem::path& path) { return load_system(read_text_file(path)); }

SystemSpec to_spec(const SystemData& sys) {
  SystemSpec s;
  s.name = sys.name;
  s.dim = sys.dim;
  for (std::size_t i = 0; i < sys.param_names.size(); ++i) s.params.emplace_back(sys.param_names[i], sys.param_values[i]);
  s.flow_set = to_string(sys.flow_set);
  s.jump_set = to_string(sys.jump_set);
  for (const auto& e : sys.flow_map) s.flow_map.push_back(to_string(e));
  for (const auto& e : sys.jump_map) s.jump_map.push_back(to_string(e));
  return s;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hyzeno
