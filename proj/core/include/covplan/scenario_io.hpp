// Copyright 2026 The covplan Authors.
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
#ifndef COVPLAN_SCENARIO_IO_HPP_
#define COVPLAN_SCENARIO_IO_HPP_

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "covplan/comms.hpp"
#include "covplan/world.hpp"

namespace covplan {

inline constexpr std::string_view kScenarioFormat = "covplan-scenario";
inline constexpr int kScenarioVersion = 1;

// JSON conversions. Doubles are written with round-trip precision, so a
// loaded scenario is bit-identical to the saved one.
void to_json(nlohmann::json& j, const Cell& c);
void from_json(const nlohmann::json& j, Cell& c);
void to_json(nlohmann::json& j, const Window& w);
void from_json(const nlohmann::json& j, Window& w);
void to_json(nlohmann::json& j, const WorldParams& p);
void from_json(const nlohmann::json& j, WorldParams& p);
void to_json(nlohmann::json& j, const TargetSet& t);
void from_json(const nlohmann::json& j, TargetSet& t);
void to_json(nlohmann::json& j, const RobotState& r);
void from_json(const nlohmann::json& j, RobotState& r);
void to_json(nlohmann::json& j, const WorldState& w);
void from_json(const nlohmann::json& j, WorldState& w);

nlohmann::json adjacency_lists(const CommGraph& graph);

// Versioned single-scenario file; throws on a wrong format tag or version.
void save_scenario(const std::filesystem::path& path, const WorldState& world);
WorldState load_scenario(const std::filesystem::path& path);

// Whole-file helpers that throw std::runtime_error with the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace covplan

#endif  // COVPLAN_SCENARIO_IO_HPP_
