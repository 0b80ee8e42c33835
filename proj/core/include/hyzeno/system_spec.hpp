#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyzeno/dynamics.hpp"

namespace hyzeno {

/// Textual system description, the JSON document form:
///   {"name": s, "dim": n, "params": {name: number}, "flow_set": expr,
///    "jump_set": expr, "flow_map": [expr]*n, "jump_map": [expr]*n}
/// `input_dim` (optional, default 0) is only meaningful for interconnection
/// subsystems, whose expressions may reference u1..um.
struct SystemSpec {
  std::string name;
  std::size_t dim = 0;
  std::size_t input_dim = 0;
  std::vector<std::pair<std::string, double>> params;
  std::string flow_set;
  std::string jump_set;
  std::vector<std::string> flow_map;
  std::vector<std::string> jump_map;
};

/// Throws Error(SchemaError).
SystemSpec parse_system_spec(std::string_view json_text);
std::string system_spec_to_json(const SystemSpec& spec);

/// Parses every expression. Parse errors are rethrown as ParseError with the
/// offending field named in the message; shape errors as SchemaError.
SystemData compile_system(const SystemSpec& spec);

/// parse_system_spec + compile_system. Only input-free specs are accepted.
SystemData load_system(std::string_view json_text);
SystemData load_system_file(const std::filesystem::path& path);

/// Prints compiled expressions back into a spec.
SystemSpec to_spec(const SystemData& sys);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace hyzeno
