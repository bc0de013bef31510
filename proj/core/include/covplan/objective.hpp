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
#ifndef COVPLAN_OBJECTIVE_HPP_
#define COVPLAN_OBJECTIVE_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "covplan/world.hpp"

namespace covplan {

// At most one action per robot; unassigned robots contribute nothing.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t robots) : actions_(robots) {}

  std::size_t robots() const { return actions_.size(); }
  bool assigned(std::size_t robot) const { return actions_.at(robot).has_value(); }
  std::optional<Action> action(std::size_t robot) const { return actions_.at(robot); }
  std::size_t assigned_count() const;
  bool complete() const { return assigned_count() == robots(); }

  void assign(std::size_t robot, Action action) { actions_.at(robot) = action; }
  void clear(std::size_t robot) { actions_.at(robot).reset(); }

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<std::optional<Action>> actions_;
};

// Per-cell coverage value: target counts for ground truth, occupancy mass
// for predicted maps.
struct WeightGrid {
  int size = 0;
  std::vector<double> weights;  // index y * size + x

  static WeightGrid from_targets(const TargetSet& targets, int grid_size);
  static WeightGrid from_map(const CoverageMap& map);

  double at(Cell c) const { return weights[static_cast<std::size_t>(c.y) * size + c.x]; }
};

// Incremental union-of-footprints evaluator. Every cell counts once no matter
// how many committed footprints include it.
class CoverageTracker {
 public:
  CoverageTracker(const WeightGrid& grid, const WorldParams& params);

  // Weight inside the footprint of `robot` after `action` that is not yet covered.
  double gain(Cell robot, Action action) const;
  // Marks the footprint covered and returns the gain it realised.
  double commit(Cell robot, Action action);
  double covered_value() const { return covered_value_; }
  void reset();

 private:
  const WeightGrid* grid_;
  WorldParams params_;
  std::vector<unsigned char> covered_;
  double covered_value_ = 0.0;
};

double coverage_value(const WeightGrid& grid, const WorldParams& params, const RobotState& robots,
                      const Assignment& assignment);

// Number of true targets inside the union of post-action footprints.
int coverage(const WorldParams& params, const RobotState& robots, const TargetSet& targets,
             const Assignment& assignment);
inline int coverage(const WorldState& world, const Assignment& assignment) {
  return coverage(world.params, world.robots, world.targets, assignment);
}

// coverage(base + candidate) - coverage(base). Throws std::invalid_argument
// if the candidate robot already has an action in `base`.
int marginal_gain(const WorldParams& params, const RobotState& robots, const TargetSet& targets,
                  const Assignment& base, std::size_t robot, Action action);
inline int marginal_gain(const WorldState& world, const Assignment& base, std::size_t robot,
                         Action action) {
  return marginal_gain(world.params, world.robots, world.targets, base, robot, action);
}

double marginal_gain_value(const WeightGrid& grid, const WorldParams& params,
                           const RobotState& robots, const Assignment& base, std::size_t robot,
                           Action action);

}  // namespace covplan

#endif  // COVPLAN_OBJECTIVE_HPP_
