#pragma once

#include <string>

#include <json.hpp>

namespace adjset {

/// Pretty-printed JSON with every floating-point value written as %.17g.
/// Non-finite values become null. Keys keep nlohmann's sorted order.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace adjset
