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
#ifndef COVPLAN_RUN_CONFIG_HPP_
#define COVPLAN_RUN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "covplan/d2coplan.hpp"
#include "covplan/datagen.hpp"
#include "covplan/dmp.hpp"
#include "covplan/world.hpp"

namespace covplan {

// Unknown keys, unparsable values and conflicting settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ConfigSource { Default, File, Flag };
std::string_view source_name(ConfigSource s);

struct BenchSettings {
  std::size_t trials = 200;
  std::vector<std::string> planners = {"expert", "dg", "random"};
  std::string variable = "none";
  std::vector<double> values;
  std::size_t warmup = 2;
  bool serial_timing = false;
  int curve_every = 0;
};

struct RunConfig {
  std::string profile = "desk";
  WorldParams world;
  std::size_t robots = 6;
  std::uint64_t seed = 1;
  std::size_t jobs = 0;
  std::size_t count = 6667;
  SplitFractions fractions;
  D2CoPlanConfig planner;
  TrainConfig train;
  DmpConfig dmp;
  DmpTrainConfig dmp_train;
  DmpRegime regime = DmpRegime::FrozenDownstream;
  bool local_history = true;
  BenchSettings bench;

  // Flat dotted key -> resolved value and where it came from.
  nlohmann::json values = nlohmann::json::object();
  std::map<std::string, ConfigSource> provenance;

  ScenarioSpec scenario() const { return {world, robots, seed}; }
  // {"key": {"value": v, "source": s}} in key order.
  nlohmann::json resolved_json() const;
};

// Nested defaults for a named profile ("desk" or "paper").
nlohmann::json profile_defaults(std::string_view profile);

// Precedence: flags > file > profile defaults. `flags` are dotted keys with
// textual values, parsed by the type of the default. A "profile" entry in the
// file that differs from an explicit flag profile is a conflict.
RunConfig resolve_config(std::optional<std::string> profile,
                         const std::optional<std::filesystem::path>& file,
                         const std::vector<std::pair<std::string, std::string>>& flags);

}  // namespace covplan

#endif  // COVPLAN_RUN_CONFIG_HPP_
