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
#include "covplan/registry.hpp"

#include <stdexcept>

namespace covplan {

std::vector<std::string> planner_names() { return {"expert", "bruteforce", "dg", "random", "d2coplan"}; }

void check_planner(std::string_view name, const PlannerOptions& options) {
  bool known = false;
  for (const std::string& n : planner_names()) known = known || n == name;
  if (!known) throw std::invalid_argument("unknown planner '" + std::string(name) + "'");
  if (name == "d2coplan") {
    if (!options.d2coplan_weights) throw std::runtime_error("planner d2coplan needs --weights");
    // Fails on an architecture mismatch before any trial runs.
    load_d2coplan(*options.d2coplan_weights, options.d2coplan_config);
  }
}

std::unique_ptr<Planner> make_planner(std::string_view name, const PlannerOptions& options,
                                      std::uint64_t seed) {
  if (name == "expert") return std::make_unique<ExpertPlanner>();
  if (name == "bruteforce") return std::make_unique<BruteForcePlanner>();
  if (name == "dg") return std::make_unique<DecentralizedGreedyPlanner>();
  if (name == "random") return std::make_unique<RandomPlanner>(seed);
  if (name == "d2coplan") {
    check_planner(name, options);
    std::shared_ptr<D2CoPlanNet<float>> net = load_d2coplan(*options.d2coplan_weights, options.d2coplan_config);
    return std::make_unique<D2CoPlanPlanner>(std::move(net));
  }
  throw std::invalid_argument("unknown planner '" + std::string(name) + "'");
}

}  // namespace covplan
