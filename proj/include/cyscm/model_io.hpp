#pragma once

// JSON model files:
//
//   {
//     "variables": ["C", "I"],
//     "mechanisms": [
//       {"type": "linear", "coefficients": [0.0, 0.5], "offset": 1.0, "noise_coefficient": 1.0},
//       {"type": "expr", "formula": "0.4*C + 0.5 + e_I"}
//     ],
//     "noise": {"means": [0.0, 0.0], "variances": [0.04, 0.04]}
//   }
//
// Mechanism i belongs to variables[i]; the noise term of variable V is "e_V".

#include <filesystem>
#include <string>
#include <string_view>

#include "cyscm/model.hpp"

namespace cyscm {

// Throws ParseError (malformed JSON, with line/column) or SchemaError (naming the field).
ScmModel parse_model(std::string_view text);
ScmModel load_model(const std::filesystem::path& path);

// Numbers are written in shortest round-trip form, so parse(serialize(m)) == m.
std::string serialize_model(const ScmModel& model);
void save_model(const ScmModel& model, const std::filesystem::path& path);

// FNV-1a over the serialized form, as 16 hex digits.
std::string model_digest(const ScmModel& model);

}  // namespace cyscm
