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
#ifndef COVPLAN_PLANNERS_HPP_
#define COVPLAN_PLANNERS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "covplan/comms.hpp"
#include "covplan/objective.hpp"
#include "covplan/world.hpp"

namespace covplan {

// What one planning step sees. `local_maps` and `graph` are the only inputs
// a decentralized planner may use; `global_map` is the centralized view.
struct PlannerInput {
  WorldParams params;
  RobotState robots;
  std::vector<CoverageMap> local_maps;
  CommGraph graph;
  std::optional<CoverageMap> global_map;

  std::size_t robot_count() const { return robots.size(); }
  // Throws std::invalid_argument if map count, graph size and robot count differ.
  void validate() const;
};

// Ground-truth planning input: global count map rasterized from `targets`.
PlannerInput make_planner_input(const WorldParams& params, const RobotState& robots,
                                const TargetSet& targets);
// Planning input from an arbitrary global map (counts or predicted occupancy).
PlannerInput make_planner_input(const WorldParams& params, const RobotState& robots,
                                const CoverageMap& global_map);

struct PlanResult {
  Assignment assignment;
  std::vector<double> robot_latency;  // seconds; per-robot compute for decentralized planners
  double total_latency = 0.0;         // seconds; wall clock of the whole call

  // Parallel-execution latency: max per-robot time for decentralized
  // planners, total wall clock for centralized ones.
  double decision_latency() const;
};

class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::string_view name() const = 0;
  virtual bool decentralized() const = 0;
  virtual PlanResult plan(const PlannerInput& input) = 0;
};

// Sequential greedy over `members`: repeatedly commit the (robot, action)
// pair with the largest uncovered weight. Ties go to the lowest robot index,
// then to the fixed action order. Returns one action per member, in order.
std::vector<Action> sequential_greedy(const WeightGrid& grid, const WorldParams& params,
                                      std::span<const Cell> robots,
                                      std::span<const std::size_t> members);

PlanResult expert_plan(const PlannerInput& input);

inline constexpr std::uint64_t kBruteForceLimit = 1'000'000;
// Exhaustive search; throws std::length_error when |A|^N exceeds the limit.
PlanResult brute_force_plan(const PlannerInput& input);

PlanResult dg_plan(const PlannerInput& input);

PlanResult random_plan(const PlannerInput& input, std::uint64_t seed);

class ExpertPlanner final : public Planner {
 public:
  std::string_view name() const override { return "expert"; }
  bool decentralized() const override { return false; }
  PlanResult plan(const PlannerInput& input) override { return expert_plan(input); }
};

class BruteForcePlanner final : public Planner {
 public:
  std::string_view name() const override { return "bruteforce"; }
  bool decentralized() const override { return false; }
  PlanResult plan(const PlannerInput& input) override { return brute_force_plan(input); }
};

class DecentralizedGreedyPlanner final : public Planner {
 public:
  std::string_view name() const override { return "dg"; }
  bool decentralized() const override { return true; }
  PlanResult plan(const PlannerInput& input) override { return dg_plan(input); }
};

// Each call draws from the next seed in its stream.
class RandomPlanner final : public Planner {
 public:
  explicit RandomPlanner(std::uint64_t seed) : seed_(seed) {}
  std::string_view name() const override { return "random"; }
  bool decentralized() const override { return true; }
  PlanResult plan(const PlannerInput& input) override;
  void reseed(std::uint64_t seed) { seed_ = seed; calls_ = 0; }

 private:
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
};

}  // namespace covplan

#endif  // COVPLAN_PLANNERS_HPP_
