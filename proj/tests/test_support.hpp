#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hyzeno/error.hpp"
#include "hyzeno/system_spec.hpp"

namespace testing_support {

inline const std::string kData = HYZENO_DATA_DIR;

inline hyzeno::SystemData make_system(const std::string& flow_set, const std::string& jump_set,
                                      std::vector<std::string> f, std::vector<std::string> g,
                                      std::vector<std::pair<std::string, double>> params = {}) {
  hyzeno::SystemSpec s;
  s.name = "test";
  s.dim = f.size();
  s.params = std::move(params);
  s.flow_set = flow_set;
  s.jump_set = jump_set;
  s.flow_map = std::move(f);
  s.jump_map = std::move(g);
  return hyzeno::compile_system(s);
}

/// The error code thrown by fn, or InvalidArgument with a test failure if none.
inline hyzeno::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const hyzeno::Error& e) {
    return e.code();
  }
  return hyzeno::ErrorCode::InvalidArgument;
}

}  // namespace testing_support
