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
#ifndef COVPLAN_WORLD_HPP_
#define COVPLAN_WORLD_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace covplan {

// Grid addressing: x grows East, y grows North. Cells are unit squares;
// cell (x, y) spans [x, x+1) x [y, y+1).
struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

// Inclusive axis-aligned cell rectangle.
struct Window {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool contains(Cell c) const { return c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1; }
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  std::size_t area() const {
    return (x1 < x0 || y1 < y0) ? 0 : static_cast<std::size_t>(width()) * height();
  }
  bool operator==(const Window&) const = default;
};

struct WorldParams {
  int grid_size = 32;
  int sensing_range = 3;
  int step_distance = 8;
  double comm_range = 12.0;
  double fill_fraction = 0.15;
  // Per-axis initial target speed is drawn from [-target_speed, target_speed].
  double target_speed = 2.0;

  // Throws std::invalid_argument when a range or fraction is out of bounds.
  void validate() const;

  static WorldParams desk();
  static WorldParams paper();

  bool operator==(const WorldParams&) const = default;
};

enum class Action : std::uint8_t { North = 0, South = 1, East = 2, West = 3, Stay = 4 };

inline constexpr std::size_t kActionCount = 5;
// Fixed order used for every tie-break in the project.
inline constexpr std::array<Action, kActionCount> kActions = {
    Action::North, Action::South, Action::East, Action::West, Action::Stay};

Cell displacement(Action action, int step_distance);
std::string_view action_name(Action action);
std::optional<Action> parse_action(std::string_view name);
inline std::size_t action_index(Action a) { return static_cast<std::size_t>(a); }

struct DensityGenConfig {
  int min_components = 10;
  int max_components = 30;
  std::vector<double> stddevs = {20.0, 30.0, 40.0, 50.0};
  double inversion_probability = 0.3;
  int max_retries = 64;

  // Stddev set rescaled by grid_size / 100 so smaller grids keep the same
  // relative structure as the 100x100 reference grid.
  static DensityGenConfig scaled_for(int grid_size);
};

struct DensityField {
  int size = 0;
  std::vector<double> probs;  // index y * size + x
  int components = 0;
  int retries = 0;

  double at(int x, int y) const { return probs[static_cast<std::size_t>(y) * size + x]; }
};

struct TargetSet {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;

  std::size_t size() const { return positions.size(); }
  bool operator==(const TargetSet&) const = default;
};

struct RobotState {
  std::vector<Cell> positions;

  std::size_t size() const { return positions.size(); }
  bool operator==(const RobotState&) const = default;
};

struct WorldState {
  WorldParams params;
  RobotState robots;
  TargetSet targets;
  std::uint64_t density_seed = 0;

  bool operator==(const WorldState&) const = default;
};

// G x G nonnegative grid. When `window` is set all mass lies inside it.
struct CoverageMap {
  int size = 0;
  std::vector<float> values;  // index y * size + x
  std::optional<Window> window;

  CoverageMap() = default;
  explicit CoverageMap(int grid_size)
      : size(grid_size), values(static_cast<std::size_t>(grid_size) * grid_size, 0.0f) {}

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * size + x]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * size + x]; }
  float at(Cell c) const { return at(c.x, c.y); }
  double total() const;

  bool operator==(const CoverageMap&) const = default;
};

// Sum of K normalized isotropic Gaussians (some inverted), clamped at 0 and
// normalized. A field that is all zero, or positive on fewer cells than the
// target count, is regenerated from the next sub-seed; \`retries\` records how
// many attempts were discarded.
DensityField generate_density(const WorldParams& params, const DensityGenConfig& gen_cfg,
                              std::uint64_t seed);

// Draws floor(fill_fraction * G^2) distinct cells, without replacement and
// proportionally to the density, and assigns uniform random velocities.
TargetSet sample_targets(const DensityField& density, const WorldParams& params,
                         std::uint64_t seed);

// Distinct uniformly random robot cells.
RobotState sample_robots(const WorldParams& params, std::size_t count, std::uint64_t seed);

// Elastic reflection of one coordinate on [0, extent). Returns the new
// coordinate and flips `velocity` once per boundary bounce.
double reflect_coordinate(double position, double& velocity, double extent);

TargetSet step_targets(const TargetSet& targets, const WorldParams& params);

// Moves by the primitive's displacement, clamped to the grid.
Cell apply_action(Cell robot, Action action, const WorldParams& params);

Cell target_cell(Vec2 position, int grid_size);

Window footprint_window(Cell center, int sensing_range, int grid_size);
std::vector<Cell> footprint(Cell center, int sensing_range, int grid_size);

// Union of every footprint reachable with one primitive: Chebyshev half-width
// step_distance + sensing_range around the robot, clipped to the grid.
Window reachable_window(Cell robot, const WorldParams& params);

// Number of targets per cell.
CoverageMap rasterize_counts(const TargetSet& targets, int grid_size);
// 1 where a cell holds at least one target, 0 elsewhere.
CoverageMap rasterize_occupancy(const TargetSet& targets, int grid_size);

CoverageMap mask_to_window(const CoverageMap& global, const Window& window);
CoverageMap local_coverage_map(const CoverageMap& global, Cell robot, const WorldParams& params);
std::vector<CoverageMap> local_coverage_maps(const CoverageMap& global, const RobotState& robots,
                                             const WorldParams& params);

}  // namespace covplan

#endif  // COVPLAN_WORLD_HPP_
