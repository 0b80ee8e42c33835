#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hyzeno/dynamics.hpp"
#include "hyzeno/system_spec.hpp"

namespace hyzeno {

/// Hybrid system with inputs: expressions range over x1..x_dim and u1..u_input_dim.
struct Subsystem {
  std::string name;
  std::size_t dim = 0;
  std::size_t input_dim = 0;
  std::vector<std::string> param_names;
  std::vector<double> param_values;
  Expr flow_set;
  Expr jump_set;
  std::vector<Expr> flow_map;
  std::vector<Expr> jump_map;
};

/// Output map h: expressions over the owning subsystem's state and parameters.
struct OutputMap {
  std::vector<Expr> outputs;
};

/// Throws SchemaError / ParseError like compile_system.
Subsystem compile_subsystem(const SystemSpec& spec);
Subsystem load_subsystem(std::string_view json_text);
Subsystem subsystem_from_system(const SystemData& sys);

/// Parses {"outputs": [expr, ...]} against the owner's state and parameters.
OutputMap parse_output_map(std::string_view json_text, const Subsystem& owner);
OutputMap output_map_from_strings(const std::vector<std::string>& exprs, const Subsystem& owner);

/// Natural interconnection with u1 = h2(x2), u2 = h1(x1). h1 is owned by
/// sub1 and must have sub2.input_dim entries, and vice versa. Parameters with
/// equal names and values are shared; conflicting names from sub2 get a
/// numeric suffix. Throws Error(DimensionMismatch).
SystemData interconnect(const Subsystem& sub1, const Subsystem& sub2, const OutputMap& h1, const OutputMap& h2);

/// Throws Error(NotInputFree) unless both subsystems have no inputs.
SystemData vacuous_interconnection(const Subsystem& sub1, const Subsystem& sub2);

}  // namespace hyzeno
