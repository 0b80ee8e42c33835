#pragma once

#include <string>

#include "hyzeno/narrowing.hpp"
#include "hyzeno/stability.hpp"

namespace hyzeno {

std::string to_json(const LyapunovReport& rep);
std::string to_json(const SfpiReport& rep);
std::string to_json(const AttractivityReport& rep);
std::string to_json(const UgsReport& rep);
std::string to_json(const NarrowingReport& rep);

}  // namespace hyzeno
