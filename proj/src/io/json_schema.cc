// Copyright 2026 The dynsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dynsim/io/json_schema.h"

#include <regex>

namespace dynsim {
namespace {

bool HasType(const nlohmann::json& v, const std::string& type) {
  if (type == "null") return v.is_null();
  if (type == "boolean") return v.is_boolean();
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() &&
           v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>()));
  }
  return false;
}

void Check(const nlohmann::json& schema, const nlohmann::json& v,
           const std::string& path, std::vector<std::string>& errors) {
  auto fail = [&](const std::string& msg) {
    errors.push_back((path.empty() ? "/" : path) + ": " + msg);
  };
  if (schema.contains("type")) {
    const nlohmann::json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = HasType(v, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || HasType(v, alt.get<std::string>());
    }
    if (!ok) {
      fail("expected type " + t.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) fail("value not in enum");
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>())
      fail("below minimum");
    if (schema.contains("maximum") && x > schema["maximum"].get<double>())
      fail("above maximum");
  }
  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    if (schema.contains("minLength") &&
        s.size() < schema["minLength"].get<std::size_t>())
      fail("string shorter than minLength");
    if (schema.contains("pattern") &&
        !std::regex_search(s, std::regex(schema["pattern"].get<std::string>())))
      fail("string does not match pattern");
  }
  if (v.is_array()) {
    if (schema.contains("minItems") &&
        v.size() < schema["minItems"].get<std::size_t>())
      fail("fewer than minItems");
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i)
        Check(schema["items"], v[i], path + "/" + std::to_string(i), errors);
    }
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!v.contains(key.get<std::string>()))
          fail("missing required key '" + key.get<std::string>() + "'");
      }
    }
    const bool closed = schema.contains("additionalProperties") &&
                        schema["additionalProperties"].is_boolean() &&
                        !schema["additionalProperties"].get<bool>();
    for (const auto& [key, value] : v.items()) {
      if (schema.contains("properties") && schema["properties"].contains(key)) {
        Check(schema["properties"][key], value, path + "/" + key, errors);
      } else if (closed) {
        fail("unexpected key '" + key + "'");
      }
    }
  }
}

}  // namespace

std::vector<std::string> ValidateJsonSchema(const nlohmann::json& schema,
                                            const nlohmann::json& doc) {
  std::vector<std::string> errors;
  Check(schema, doc, "", errors);
  return errors;
}

}  // namespace dynsim
