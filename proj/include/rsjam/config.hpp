// Copyright 2026 rsjam contributors
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

#pragma once

#include "rsjam/types.hpp"

#include <json.hpp>

#include <string>

namespace rsjam {

using json = nlohmann::json;

// Scenario fields are read from the top level of the document. Sp is 1-based
// in JSON; "Np" is accepted instead of Sp. "mu" and "N0" accept "auto".
ScenarioConfig scenario_from_json(const json& j);
json scenario_to_json(const ScenarioConfig& cfg);

json read_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);

}  // namespace rsjam
