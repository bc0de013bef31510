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
#include "covplan/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace covplan {

std::size_t Assignment::assigned_count() const {
  std::size_t n = 0;
  for (const auto& a : actions_) n += a.has_value() ? 1 : 0;
  return n;
}

WeightGrid WeightGrid::from_targets(const TargetSet& targets, int grid_size) {
  WeightGrid grid;
  grid.size = grid_size;
  grid.weights.assign(static_cast<std::size_t>(grid_size) * grid_size, 0.0);
  for (const Vec2& p : targets.positions) {
    const Cell c = target_cell(p, grid_size);
    grid.weights[static_cast<std::size_t>(c.y) * grid_size + c.x] += 1.0;
  }
  return grid;
}

WeightGrid WeightGrid::from_map(const CoverageMap& map) {
  WeightGrid grid;
  grid.size = map.size;
  grid.weights.assign(map.values.begin(), map.values.end());
  return grid;
}

CoverageTracker::CoverageTracker(const WeightGrid& grid, const WorldParams& params)
    : grid_(&grid), params_(params), covered_(grid.weights.size(), 0) {
  if (grid.size != params.grid_size) {
    throw std::invalid_argument("CoverageTracker: grid size does not match params");
  }
}

double CoverageTracker::gain(Cell robot, Action action) const {
  const Window w =
      footprint_window(apply_action(robot, action, params_), params_.sensing_range, grid_->size);
  double sum = 0.0;
  for (int y = w.y0; y <= w.y1; ++y) {
    const std::size_t base = static_cast<std::size_t>(y) * grid_->size;
    for (int x = w.x0; x <= w.x1; ++x) {
      if (!covered_[base + x]) sum += grid_->weights[base + x];
    }
  }
  return sum;
}

double CoverageTracker::commit(Cell robot, Action action) {
  const Window w =
      footprint_window(apply_action(robot, action, params_), params_.sensing_range, grid_->size);
  double sum = 0.0;
  for (int y = w.y0; y <= w.y1; ++y) {
    const std::size_t base = static_cast<std::size_t>(y) * grid_->size;
    for (int x = w.x0; x <= w.x1; ++x) {
      if (!covered_[base + x]) {
        covered_[base + x] = 1;
        sum += grid_->weights[base + x];
      }
    }
  }
  covered_value_ += sum;
  return sum;
}

void CoverageTracker::reset() {
  std::fill(covered_.begin(), covered_.end(), 0);
  covered_value_ = 0.0;
}

namespace {

void check_sizes(const RobotState& robots, const Assignment& assignment) {
  if (assignment.robots() != robots.size()) {
    throw std::invalid_argument("assignment covers " + std::to_string(assignment.robots()) +
                                " robots but the world has " + std::to_string(robots.size()));
  }
}

}  // namespace

double coverage_value(const WeightGrid& grid, const WorldParams& params, const RobotState& robots,
                      const Assignment& assignment) {
  check_sizes(robots, assignment);
  CoverageTracker tracker(grid, params);
  for (std::size_t i = 0; i < robots.size(); ++i) {
    if (auto a = assignment.action(i)) tracker.commit(robots.positions[i], *a);
  }
  return tracker.covered_value();
}

int coverage(const WorldParams& params, const RobotState& robots, const TargetSet& targets,
             const Assignment& assignment) {
  const WeightGrid grid = WeightGrid::from_targets(targets, params.grid_size);
  return static_cast<int>(std::lround(coverage_value(grid, params, robots, assignment)));
}

double marginal_gain_value(const WeightGrid& grid, const WorldParams& params,
                           const RobotState& robots, const Assignment& base, std::size_t robot,
                           Action action) {
  check_sizes(robots, base);
  if (base.assigned(robot)) {
    throw std::invalid_argument("marginal_gain: robot " + std::to_string(robot) +
                                " is already assigned");
  }
  CoverageTracker tracker(grid, params);
  for (std::size_t i = 0; i < robots.size(); ++i) {
    if (auto a = base.action(i)) tracker.commit(robots.positions[i], *a);
  }
  return tracker.gain(robots.positions[robot], action);
}

int marginal_gain(const WorldParams& params, const RobotState& robots, const TargetSet& targets,
                  const Assignment& base, std::size_t robot, Action action) {
  const WeightGrid grid = WeightGrid::from_targets(targets, params.grid_size);
  return static_cast<int>(
      std::lround(marginal_gain_value(grid, params, robots, base, robot, action)));
}

}  // namespace covplan
