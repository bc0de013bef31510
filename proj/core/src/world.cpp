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
#include "covplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "covplan/rng.hpp"

namespace covplan {

void WorldParams::validate() const {
  if (grid_size < 1) throw std::invalid_argument("grid_size must be positive");
  if (sensing_range < 1) throw std::invalid_argument("sensing_range must be positive");
  if (step_distance <= 0) throw std::invalid_argument("step_distance must be positive");
  if (!(comm_range > 0.0)) throw std::invalid_argument("comm_range must be positive");
  if (step_distance + sensing_range >= grid_size) {
    throw std::invalid_argument("step_distance + sensing_range must be smaller than grid_size");
  }
  if (!(fill_fraction > 0.0 && fill_fraction <= 1.0)) {
    throw std::invalid_argument("fill_fraction must lie in (0, 1]");
  }
  if (target_speed < 0.0) throw std::invalid_argument("target_speed must be nonnegative");
}

WorldParams WorldParams::desk() { return WorldParams{}; }

WorldParams WorldParams::paper() {
  WorldParams p;
  p.grid_size = 100;
  p.sensing_range = 6;
  p.step_distance = 20;
  p.comm_range = 20.0;
  p.fill_fraction = 0.15;
  return p;
}

Cell displacement(Action action, int step_distance) {
  switch (action) {
    case Action::North: return {0, step_distance};
    case Action::South: return {0, -step_distance};
    case Action::East: return {step_distance, 0};
    case Action::West: return {-step_distance, 0};
    case Action::Stay: return {0, 0};
  }
  return {0, 0};
}

std::string_view action_name(Action action) {
  switch (action) {
    case Action::North: return "north";
    case Action::South: return "south";
    case Action::East: return "east";
    case Action::West: return "west";
    case Action::Stay: return "stay";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view name) {
  for (Action a : kActions) {
    if (action_name(a) == name) return a;
  }
  return std::nullopt;
}

DensityGenConfig DensityGenConfig::scaled_for(int grid_size) {
  DensityGenConfig cfg;
  const double scale = static_cast<double>(grid_size) / 100.0;
  for (double& s : cfg.stddevs) s *= scale;
  return cfg;
}

double CoverageMap::total() const {
  double sum = 0.0;
  for (float v : values) sum += v;
  return sum;
}

DensityField generate_density(const WorldParams& params, const DensityGenConfig& gen_cfg,
                              std::uint64_t seed) {
  const int g = params.grid_size;
  if (g < 1) throw std::invalid_argument("generate_density: grid_size must be positive");
  if (gen_cfg.min_components < 1 || gen_cfg.max_components < gen_cfg.min_components) {
    throw std::invalid_argument("generate_density: invalid component-count range");
  }
  if (gen_cfg.stddevs.empty()) throw std::invalid_argument("generate_density: empty stddev set");
  for (double s : gen_cfg.stddevs) {
    if (!(s > 0.0)) throw std::invalid_argument("generate_density: stddevs must be positive");
  }

  const auto cells = static_cast<std::size_t>(g) * g;
  // Targets occupy distinct cells, so a field whose clamped support is smaller
  // than the target count is rejected like an all-zero one.
  const auto needed =
      static_cast<std::size_t>(std::floor(params.fill_fraction * static_cast<double>(cells) + 1e-9));
  for (int attempt = 0; attempt <= gen_cfg.max_retries; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    const auto k = static_cast<int>(rng.between(gen_cfg.min_components, gen_cfg.max_components));

    std::vector<double> field(cells, 0.0);
    for (int c = 0; c < k; ++c) {
      const double mx = rng.uniform(0.0, g);
      const double my = rng.uniform(0.0, g);
      const double sigma = gen_cfg.stddevs[rng.below(gen_cfg.stddevs.size())];
      const double sign = rng.bernoulli(gen_cfg.inversion_probability) ? -1.0 : 1.0;
      const double norm = sign / (2.0 * std::numbers::pi * sigma * sigma);
      const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
      for (int y = 0; y < g; ++y) {
        const double dy = (y + 0.5) - my;
        for (int x = 0; x < g; ++x) {
          const double dx = (x + 0.5) - mx;
          field[static_cast<std::size_t>(y) * g + x] += norm * std::exp(-(dx * dx + dy * dy) * inv2s2);
        }
      }
    }

    double total = 0.0;
    std::size_t support = 0;
    for (double& v : field) {
      v = std::max(v, 0.0);
      total += v;
      support += v > 0.0 ? 1 : 0;
    }
    if (!(total > 0.0) || support < std::max<std::size_t>(needed, 1)) continue;
    for (double& v : field) v /= total;

    DensityField out;
    out.size = g;
    out.probs = std::move(field);
    out.components = k;
    out.retries = attempt;
    return out;
  }
  throw std::runtime_error("generate_density: clamped field zero or too sparse for the fill after " +
                           std::to_string(gen_cfg.max_retries + 1) + " attempts");
}

TargetSet sample_targets(const DensityField& density, const WorldParams& params,
                         std::uint64_t seed) {
  const int g = density.size;
  if (g != params.grid_size) {
    throw std::invalid_argument("sample_targets: density size does not match grid_size");
  }
  const auto cells = static_cast<std::size_t>(g) * g;
  const auto count =
      static_cast<std::size_t>(std::floor(params.fill_fraction * static_cast<double>(cells) + 1e-9));

  TargetSet out;
  if (count == 0) return out;

  // Weighted sampling without replacement via exponential keys: the k cells
  // with the smallest -log(u)/w are a successive-sampling draw.
  Rng rng(seed);
  struct Keyed {
    double key;
    std::size_t cell;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    const double w = density.probs[i];
    if (w > 0.0) keyed.push_back({-std::log(u) / w, i});
  }
  if (keyed.size() < count) {
    throw std::runtime_error("sample_targets: requested " + std::to_string(count) +
                             " targets but only " + std::to_string(keyed.size()) +
                             " cells have positive density");
  }
  const auto by_key = [](const Keyed& a, const Keyed& b) {
    return a.key < b.key || (a.key == b.key && a.cell < b.cell);
  };
  std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count - 1),
                   keyed.end(), by_key);
  keyed.resize(count);
  std::sort(keyed.begin(), keyed.end(), by_key);

  out.positions.reserve(count);
  out.velocities.reserve(count);
  for (const Keyed& k : keyed) {
    const auto x = static_cast<double>(k.cell % static_cast<std::size_t>(g));
    const auto y = static_cast<double>(k.cell / static_cast<std::size_t>(g));
    out.positions.push_back({x + 0.5, y + 0.5});
  }
  const double s = params.target_speed;
  for (std::size_t i = 0; i < count; ++i) {
    const double vx = rng.uniform(-s, s);
    const double vy = rng.uniform(-s, s);
    out.velocities.push_back({vx, vy});
  }
  return out;
}

RobotState sample_robots(const WorldParams& params, std::size_t count, std::uint64_t seed) {
  const int g = params.grid_size;
  const auto cells = static_cast<std::size_t>(g) * g;
  if (count > cells) throw std::invalid_argument("sample_robots: more robots than cells");
  // Partial Fisher-Yates over the cell indices.
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  RobotState out;
  out.positions.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(cells - i);
    std::swap(order[i], order[j]);
    out.positions.push_back({static_cast<int>(order[i] % g), static_cast<int>(order[i] / g)});
  }
  return out;
}

double reflect_coordinate(double position, double& velocity, double extent) {
  double p = position;
  while (p < 0.0 || p > extent) {
    if (p < 0.0) {
      p = -p;
    } else {
      p = 2.0 * extent - p;
    }
    velocity = -velocity;
  }
  // Exactly on the far wall: step inside the half-open domain.
  if (p >= extent) p = std::nextafter(extent, 0.0);
  return p;
}

TargetSet step_targets(const TargetSet& targets, const WorldParams& params) {
  const auto extent = static_cast<double>(params.grid_size);
  TargetSet out = targets;
  for (std::size_t i = 0; i < out.positions.size(); ++i) {
    Vec2& p = out.positions[i];
    Vec2& v = out.velocities[i];
    p.x = reflect_coordinate(p.x + v.x, v.x, extent);
    p.y = reflect_coordinate(p.y + v.y, v.y, extent);
  }
  return out;
}

Cell apply_action(Cell robot, Action action, const WorldParams& params) {
  const Cell d = displacement(action, params.step_distance);
  const int hi = params.grid_size - 1;
  return {std::clamp(robot.x + d.x, 0, hi), std::clamp(robot.y + d.y, 0, hi)};
}

Cell target_cell(Vec2 position, int grid_size) {
  const int hi = grid_size - 1;
  return {std::clamp(static_cast<int>(std::floor(position.x)), 0, hi),
          std::clamp(static_cast<int>(std::floor(position.y)), 0, hi)};
}

Window footprint_window(Cell center, int sensing_range, int grid_size) {
  const int hi = grid_size - 1;
  return {std::max(center.x - sensing_range, 0), std::max(center.y - sensing_range, 0),
          std::min(center.x + sensing_range, hi), std::min(center.y + sensing_range, hi)};
}

std::vector<Cell> footprint(Cell center, int sensing_range, int grid_size) {
  const Window w = footprint_window(center, sensing_range, grid_size);
  std::vector<Cell> cells;
  cells.reserve(w.area());
  for (int y = w.y0; y <= w.y1; ++y)
    for (int x = w.x0; x <= w.x1; ++x) cells.push_back({x, y});
  return cells;
}

Window reachable_window(Cell robot, const WorldParams& params) {
  return footprint_window(robot, params.step_distance + params.sensing_range, params.grid_size);
}

CoverageMap rasterize_counts(const TargetSet& targets, int grid_size) {
  CoverageMap map(grid_size);
  for (const Vec2& p : targets.positions) {
    const Cell c = target_cell(p, grid_size);
    map.at(c.x, c.y) += 1.0f;
  }
  return map;
}

CoverageMap rasterize_occupancy(const TargetSet& targets, int grid_size) {
  CoverageMap map(grid_size);
  for (const Vec2& p : targets.positions) {
    const Cell c = target_cell(p, grid_size);
    map.at(c.x, c.y) = 1.0f;
  }
  return map;
}

CoverageMap mask_to_window(const CoverageMap& global, const Window& window) {
  CoverageMap out(global.size);
  for (int y = std::max(window.y0, 0); y <= std::min(window.y1, global.size - 1); ++y)
    for (int x = std::max(window.x0, 0); x <= std::min(window.x1, global.size - 1); ++x)
      out.at(x, y) = global.at(x, y);
  out.window = window;
  return out;
}

CoverageMap local_coverage_map(const CoverageMap& global, Cell robot, const WorldParams& params) {
  return mask_to_window(global, reachable_window(robot, params));
}

std::vector<CoverageMap> local_coverage_maps(const CoverageMap& global, const RobotState& robots,
                                             const WorldParams& params) {
  std::vector<CoverageMap> maps;
  maps.reserve(robots.size());
  for (const Cell& r : robots.positions) maps.push_back(local_coverage_map(global, r, params));
  return maps;
}

}  // namespace covplan
