#include "scalenas/schema.hpp"

#include <stdexcept>

#include "json.hpp"

namespace scalenas {

namespace {

using nlohmann::json;

bool type_matches(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "null") return v.is_null();
  return false;
}

void check(const json& schema, const json& v, const std::string& where,
           std::vector<std::string>& errors) {
  if (!schema.is_object()) return;

  if (schema.contains("type")) {
    const std::string t = schema.at("type").get<std::string>();
    if (!type_matches(v, t)) {
      errors.push_back(where + ": expected " + t + ", got " +
                       std::string(v.type_name()));
      return;  // structure is wrong; nested checks would only cascade
    }
  }
  if (schema.contains("enum")) {
    bool hit = false;
    for (const json& candidate : schema.at("enum"))
      if (candidate == v) hit = true;
    if (!hit) errors.push_back(where + ": value not in enum");
  }
  if (v.is_number()) {
    if (schema.contains("minimum") &&
        v.get<double>() < schema.at("minimum").get<double>())
      errors.push_back(where + ": below minimum");
    if (schema.contains("maximum") &&
        v.get<double>() > schema.at("maximum").get<double>())
      errors.push_back(where + ": above maximum");
  }
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const json& key : schema.at("required"))
        if (!v.contains(key.get<std::string>()))
          errors.push_back(where + ": missing required key \"" +
                           key.get<std::string>() + "\"");
    const json* props =
        schema.contains("properties") ? &schema.at("properties") : nullptr;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props != nullptr && props->contains(it.key())) {
        check(props->at(it.key()), it.value(), where + "." + it.key(), errors);
      } else if (schema.contains("additionalProperties") &&
                 schema.at("additionalProperties").is_boolean() &&
                 !schema.at("additionalProperties").get<bool>()) {
        errors.push_back(where + ": unexpected key \"" + it.key() + "\"");
      }
    }
  }
  if (v.is_array() && schema.contains("items")) {
    std::size_t i = 0;
    for (const json& item : v)
      check(schema.at("items"), item, where + "[" + std::to_string(i++) + "]",
            errors);
  }
}

}  // namespace

std::vector<std::string> validate_json_schema(
    const std::string& schema_text, const std::string& instance_text) {
  const json schema = json::parse(schema_text, nullptr, false);
  if (schema.is_discarded())
    throw std::invalid_argument("schema is not valid JSON");
  const json instance = json::parse(instance_text, nullptr, false);
  if (instance.is_discarded())
    throw std::invalid_argument("instance is not valid JSON");
  std::vector<std::string> errors;
  check(schema, instance, "$", errors);
  return errors;
}

}  // namespace scalenas
