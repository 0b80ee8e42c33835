#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyzeno/expr.hpp"

namespace hyzeno {

using State = std::vector<double>;

/// Compiled hybrid system data (C, f, D, g) over R^dim.
struct SystemData {
  std::string name;
  std::size_t dim = 0;
  std::vector<std::string> param_names;
  std::vector<double> param_values;
  Expr flow_set;                 // boolean
  Expr jump_set;                 // boolean
  std::vector<Expr> flow_map;    // dim real expressions
  std::vector<Expr> jump_map;    // dim real expressions
  double eps_eq = kDefaultEpsEq;

  EvalEnv env(std::span<const double> x) const;

  /// Throws Error(DimensionMismatch) if map lengths or variable references
  /// do not fit `dim`, or the sets are not boolean.
  void validate() const;

  ParseContext parse_context() const;
};

bool in_flow_set(const SystemData& sys, std::span<const double> x);
bool in_jump_set(const SystemData& sys, std::span<const double> x);
State flow(const SystemData& sys, std::span<const double> x);
void flow_into(const SystemData& sys, std::span<const double> x, std::span<double> out);
State jump(const SystemData& sys, std::span<const double> x);

struct ScenarioParams {
  double lambda = 0.5;   // restitution coefficient, in (0, 1)
  double gravity = 9.81;
};

/// bouncing_ball, two_balls, example3.
std::vector<std::string> scenario_names();
std::string_view scenario_description(std::string_view name);

/// Throws Error(UnknownScenario | ParamOutOfRange).
SystemData builtin_scenario(std::string_view name, const ScenarioParams& params = {});

}  // namespace hyzeno
