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
#ifndef COVPLAN_REGISTRY_HPP_
#define COVPLAN_REGISTRY_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covplan/d2coplan.hpp"
#include "covplan/nn/weights.hpp"
#include "covplan/planners.hpp"

namespace covplan {

struct PlannerOptions {
  std::optional<nn::WeightStore> d2coplan_weights;
  D2CoPlanConfig d2coplan_config;
};

// expert, bruteforce, dg, random, d2coplan.
std::vector<std::string> planner_names();

// Throws std::invalid_argument for an unknown name and std::runtime_error when
// d2coplan is requested without weights. Meant to run before any trial.
void check_planner(std::string_view name, const PlannerOptions& options);

// Fresh instance per call: planners with internal buffers (the network) are
// not shared between threads. `seed` only feeds the random planner.
std::unique_ptr<Planner> make_planner(std::string_view name, const PlannerOptions& options,
                                      std::uint64_t seed);

}  // namespace covplan

#endif  // COVPLAN_REGISTRY_HPP_
