#pragma once

#include <string>
#include <vector>

namespace scalenas {

// Structural JSON validation covering the subset the shipped schemas use:
// type, properties, required, items (single schema), enum, minimum, maximum,
// additionalProperties (boolean). Returns human-readable violations,
// empty when the instance conforms. Throws std::invalid_argument when the
// schema or instance is not parseable JSON.
std::vector<std::string> validate_json_schema(const std::string& schema_text,
                                              const std::string& instance_text);

}  // namespace scalenas
