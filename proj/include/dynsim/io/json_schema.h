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

// Validator for the subset of JSON Schema (draft-07) used by the published
// report schemas: type, enum, required, properties, additionalProperties
// (boolean), items, minItems, minimum, maximum, minLength, pattern.

#ifndef DYNSIM_IO_JSON_SCHEMA_H_
#define DYNSIM_IO_JSON_SCHEMA_H_

#include <string>
#include <vector>

#include "json.hpp"

namespace dynsim {

// Returns one message per violation (empty when valid), each prefixed with
// a JSON-pointer-like path.
std::vector<std::string> ValidateJsonSchema(const nlohmann::json& schema,
                                            const nlohmann::json& doc);

}  // namespace dynsim

#endif  // DYNSIM_IO_JSON_SCHEMA_H_
