#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace vscale {

// Serializes with every floating-point number printed as "%.17g" so that
// output is byte-stable and round-trips exactly. Object keys keep insertion
// order when given an ordered_json.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

std::string format_double(double x);

}  // namespace vscale
