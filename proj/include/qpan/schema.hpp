/// Minimal structural JSON validation: enough of JSON Schema (type,
/// properties, required, items, enum) to pin the shipped output formats.
#pragma once

#include <string>

#include <json.hpp>

namespace qpan {

inline bool schema_type_matches(const nlohmann::json& doc,
                                const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "number") return doc.is_number();
  if (type == "integer") return doc.is_number_integer();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  return false;
}

/// Returns an empty string on success, otherwise a path-prefixed reason.
inline std::string schema_violation(const nlohmann::json& schema,
                                    const nlohmann::json& doc,
                                    const std::string& path = "$") {
  if (schema.contains("type") &&
      !schema_type_matches(doc, schema["type"].get<std::string>())) {
    return path + ": expected type " + schema["type"].get<std::string>();
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& v : schema["enum"]) {
      if (v == doc) {
        ok = true;
        break;
      }
    }
    if (!ok) return path + ": value not in enum";
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) {
          return path + ": missing required key " + key.get<std::string>();
        }
      }
    }
    if (schema.contains("properties")) {
      for (auto it = schema["properties"].begin();
           it != schema["properties"].end(); ++it) {
        if (doc.contains(it.key())) {
          std::string err =
              schema_violation(it.value(), doc[it.key()], path + "." + it.key());
          if (!err.empty()) return err;
        }
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      std::string err = schema_violation(schema["items"], doc[i],
                                         path + "[" + std::to_string(i) + "]");
      if (!err.empty()) return err;
    }
  }
  return "";
}

inline bool validates_against(const nlohmann::json& schema,
                              const nlohmann::json& doc) {
  return schema_violation(schema, doc).empty();
}

}  // namespace qpan
