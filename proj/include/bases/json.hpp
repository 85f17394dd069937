#pragma once

#include <nlohmann/json.hpp>

namespace bases {

// Insertion-ordered so written documents keep their field order.
using Json = nlohmann::ordered_json;

}  // namespace bases
