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
#include "covplan/planners.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>

#include "covplan/rng.hpp"

namespace covplan {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void PlannerInput::validate() const {
  const std::size_t n = robots.size();
  if (local_maps.size() != n) {
    throw std::invalid_argument("planner input: " + std::to_string(local_maps.size()) +
                                " local maps for " + std::to_string(n) + " robots");
  }
  if (graph.size() != n) {
    throw std::invalid_argument("planner input: communication graph has " +
                                std::to_string(graph.size()) + " nodes for " +
                                std::to_string(n) + " robots");
  }
  for (const CoverageMap& m : local_maps) {
    if (m.size != params.grid_size) throw std::invalid_argument("planner input: map size mismatch");
  }
}

PlannerInput make_planner_input(const WorldParams& params, const RobotState& robots,
                                const CoverageMap& global_map) {
  PlannerInput input;
  input.params = params;
  input.robots = robots;
  input.local_maps = local_coverage_maps(global_map, robots, params);
  input.graph = build_graph(robots, params.comm_range);
  input.global_map = global_map;
  return input;
}

PlannerInput make_planner_input(const WorldParams& params, const RobotState& robots,
                                const TargetSet& targets) {
  return make_planner_input(params, robots, rasterize_counts(targets, params.grid_size));
}

double PlanResult::decision_latency() const {
  if (robot_latency.empty()) return total_latency;
  return *std::max_element(robot_latency.begin(), robot_latency.end());
}

std::vector<Action> sequential_greedy(const WeightGrid& grid, const WorldParams& params,
                                      std::span<const Cell> robots,
                                      std::span<const std::size_t> members) {
  CoverageTracker tracker(grid, params);
  std::vector<Action> chosen(members.size(), Action::Stay);
  std::vector<bool> done(members.size(), false);
  for (std::size_t round = 0; round < members.size(); ++round) {
    double best_gain = -1.0;
    std::size_t best_slot = 0;
    Action best_action = Action::Stay;
    // members are ascending, so slot order is robot-index order.
    for (std::size_t slot = 0; slot < members.size(); ++slot) {
      if (done[slot]) continue;
      const Cell pos = robots[members[slot]];
      for (Action a : kActions) {
        const double g = tracker.gain(pos, a);
        if (g > best_gain) {
          best_gain = g;
          best_slot = slot;
          best_action = a;
        }
      }
    }
    tracker.commit(robots[members[best_slot]], best_action);
    chosen[best_slot] = best_action;
    done[best_slot] = true;
  }
  return chosen;
}

PlanResult expert_plan(const PlannerInput& input) {
  if (!input.global_map) throw std::invalid_argument("expert_plan: global map required");
  const auto start = Clock::now();
  const std::size_t n = input.robot_count();
  const WeightGrid grid = WeightGrid::from_map(*input.global_map);
  std::vector<std::size_t> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = i;
  const std::vector<Action> actions =
      sequential_greedy(grid, input.params, input.robots.positions, members);
  PlanResult result;
  result.assignment = Assignment(n);
  for (std::size_t i = 0; i < n; ++i) result.assignment.assign(i, actions[i]);
  result.total_latency = seconds_since(start);
  return result;
}

PlanResult brute_force_plan(const PlannerInput& input) {
  if (!input.global_map) throw std::invalid_argument("brute_force_plan: global map required");
  const std::size_t n = input.robot_count();
  std::uint64_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) {
    combos *= kActionCount;
    if (combos > kBruteForceLimit) {
      throw std::length_error("brute_force_plan: " + std::to_string(kActionCount) + "^" +
                              std::to_string(n) + " joint actions exceeds the limit of " +
                              std::to_string(kBruteForceLimit));
    }
  }
  const auto start = Clock::now();
  const WeightGrid grid = WeightGrid::from_map(*input.global_map);
  CoverageTracker tracker(grid, input.params);

  // Lexicographic enumeration with robot 0 as the most significant digit;
  // strict improvement keeps the lexicographically smallest optimum.
  std::vector<std::size_t> digits(n, 0);
  std::vector<std::size_t> best_digits(n, 0);
  double best_value = -1.0;
  for (std::uint64_t c = 0; c < combos; ++c) {
    tracker.reset();
    for (std::size_t i = 0; i < n; ++i) tracker.commit(input.robots.positions[i], kActions[digits[i]]);
    if (tracker.covered_value() > best_value) {
      best_value = tracker.covered_value();
      best_digits = digits;
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++digits[i] < kActionCount) break;
      digits[i] = 0;
    }
  }
  PlanResult result;
  result.assignment = Assignment(n);
  for (std::size_t i = 0; i < n; ++i) result.assignment.assign(i, kActions[best_digits[i]]);
  result.total_latency = seconds_since(start);
  return result;
}

PlanResult dg_plan(const PlannerInput& input) {
  input.validate();
  const auto start = Clock::now();
  const std::size_t n = input.robot_count();
  const int g = input.params.grid_size;
  PlanResult result;
  result.assignment = Assignment(n);
  result.robot_latency.assign(n, 0.0);

  WeightGrid merged;
  merged.size = g;
  for (std::size_t i = 0; i < n; ++i) {
    const auto robot_start = Clock::now();
    std::vector<std::size_t> clique = input.graph.neighbors(i);
    clique.push_back(i);
    std::sort(clique.begin(), clique.end());

    // Robot i only holds its own and its 1-hop neighbours' local maps.
    merged.weights.assign(static_cast<std::size_t>(g) * g, 0.0);
    for (std::size_t member : clique) {
      const CoverageMap& m = input.local_maps[member];
      const Window w = m.window.value_or(Window{0, 0, g - 1, g - 1});
      for (int y = w.y0; y <= w.y1; ++y) {
        for (int x = w.x0; x <= w.x1; ++x) {
          double& dst = merged.weights[static_cast<std::size_t>(y) * g + x];
          dst = std::max(dst, static_cast<double>(m.at(x, y)));
        }
      }
    }
    const std::vector<Action> actions =
        sequential_greedy(merged, input.params, input.robots.positions, clique);
    const auto self = static_cast<std::size_t>(
        std::find(clique.begin(), clique.end(), i) - clique.begin());
    result.assignment.assign(i, actions[self]);
    result.robot_latency[i] = seconds_since(robot_start);
  }
  result.total_latency = seconds_since(start);
  return result;
}

PlanResult random_plan(const PlannerInput& input, std::uint64_t seed) {
  const auto start = Clock::now();
  const std::size_t n = input.robot_count();
  Rng rng(seed);
  PlanResult result;
  result.assignment = Assignment(n);
  for (std::size_t i = 0; i < n; ++i) result.assignment.assign(i, kActions[rng.below(kActionCount)]);
  result.total_latency = seconds_since(start);
  result.robot_latency.assign(n, result.total_latency / static_cast<double>(std::max<std::size_t>(n, 1)));
  return result;
}

PlanResult RandomPlanner::plan(const PlannerInput& input) {
  return random_plan(input, derive_seed(seed_, calls_++));
}

}  // namespace covplan
