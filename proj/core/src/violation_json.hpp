#pragma once

#include "json.hpp"
#include "scenforge/oracles.hpp"

namespace scenforge::detail {

nlohmann::ordered_json violation_to_json(const Violation& v);
Violation violation_from_json(const nlohmann::ordered_json& j);

}  // namespace scenforge::detail
