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
#include <gtest/gtest.h>

#include <set>

#include "covplan/objective.hpp"
#include "covplan/rng.hpp"

namespace covplan {
namespace {

// Brute oracle: count targets whose cell lies in the set of covered cells.
int oracle_coverage(const WorldParams& p, const RobotState& r, const TargetSet& t,
                    const Assignment& a) {
  std::set<Cell> covered;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!a.assigned(i)) continue;
    const Cell c = apply_action(r.positions[i], *a.action(i), p);
    for (int dy = -p.sensing_range; dy <= p.sensing_range; ++dy) {
      for (int dx = -p.sensing_range; dx <= p.sensing_range; ++dx) {
        covered.insert({c.x + dx, c.y + dy});
      }
    }
  }
  int n = 0;
  for (const Vec2& v : t.positions) n += covered.count(target_cell(v, p.grid_size)) ? 1 : 0;
  return n;
}

struct Instance {
  WorldParams params;
  RobotState robots;
  TargetSet targets;
};

Instance random_instance(std::uint64_t seed, std::size_t robots = 5) {
  Instance inst;
  inst.params.grid_size = 20;
  inst.params.sensing_range = 2;
  inst.params.step_distance = 4;
  const DensityField d =
      generate_density(inst.params, DensityGenConfig::scaled_for(20), derive_seed(seed, 1));
  inst.targets = sample_targets(d, inst.params, derive_seed(seed, 2));
  inst.robots = sample_robots(inst.params, robots, derive_seed(seed, 3));
  return inst;
}

Assignment random_assignment(Rng& rng, std::size_t n, double p_assign) {
  Assignment a(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < p_assign) a.assign(i, kActions[rng.below(kActions.size())]);
  }
  return a;
}

TEST(Coverage, MatchesBruteOracle) {
  Rng rng(1);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Instance inst = random_instance(s);
    const Assignment a = random_assignment(rng, inst.robots.size(), 0.8);
    EXPECT_EQ(coverage(inst.params, inst.robots, inst.targets, a),
              oracle_coverage(inst.params, inst.robots, inst.targets, a));
  }
}

TEST(Coverage, UnionCountsOverlapOnce) {
  WorldParams p;
  RobotState r;
  r.positions = {{10, 10}, {10, 10}};
  TargetSet t;
  t.positions = {{10.5, 10.5}, {12.5, 10.5}};
  t.velocities.assign(2, {});
  Assignment a(2);
  a.assign(0, Action::Stay);
  EXPECT_EQ(coverage(p, r, t, a), 2);
  a.assign(1, Action::Stay);
  EXPECT_EQ(coverage(p, r, t, a), 2);
  EXPECT_EQ(coverage(p, r, t, Assignment(2)), 0);
}

TEST(Coverage, TrackerAgreesWithValue) {
  Rng rng(4);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Instance inst = random_instance(s);
    const WeightGrid grid = WeightGrid::from_targets(inst.targets, inst.params.grid_size);
    CoverageTracker tracker(grid, inst.params);
    Assignment a(inst.robots.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < inst.robots.size(); ++i) {
      const Action act = kActions[rng.below(5)];
      const double g = tracker.gain(inst.robots.positions[i], act);
      EXPECT_EQ(g, marginal_gain_value(grid, inst.params, inst.robots, a, i, act));
      sum += tracker.commit(inst.robots.positions[i], act);
      a.assign(i, act);
    }
    EXPECT_EQ(sum, tracker.covered_value());
    EXPECT_EQ(sum, coverage_value(grid, inst.params, inst.robots, a));
    EXPECT_EQ(static_cast<int>(sum), coverage(inst.params, inst.robots, inst.targets, a));
  }
}

TEST(MarginalGain, RejectsAssignedRobot) {
  const Instance inst = random_instance(3);
  Assignment a(inst.robots.size());
  a.assign(0, Action::North);
  EXPECT_THROW(marginal_gain(inst.params, inst.robots, inst.targets, a, 0, Action::South),
               std::invalid_argument);
}

// Nested A subset of B, candidate robot outside B: gain(A) >= gain(B) >= 0.
TEST(MarginalGain, SubmodularAndMonotone) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = random_instance(static_cast<std::uint64_t>(trial % 40), 6);
    const std::size_t n = inst.robots.size();
    const std::size_t candidate = rng.below(n);
    Assignment b = random_assignment(rng, n, 0.7);
    b.clear(candidate);
    Assignment a = b;
    for (std::size_t i = 0; i < n; ++i) {
      if (a.assigned(i) && rng.uniform() < 0.5) a.clear(i);
    }
    const Action act = kActions[rng.below(5)];
    const int ga = marginal_gain(inst.params, inst.robots, inst.targets, a, candidate, act);
    const int gb = marginal_gain(inst.params, inst.robots, inst.targets, b, candidate, act);
    EXPECT_GE(gb, 0);
    EXPECT_GE(ga, gb);
    EXPECT_GE(coverage(inst.params, inst.robots, inst.targets, b),
              coverage(inst.params, inst.robots, inst.targets, a));
  }
}

TEST(WeightGrid, FromTargetsCountsPerCell) {
  TargetSet t;
  t.positions = {{1.5, 1.5}, {1.1, 1.9}, {0.5, 3.5}};
  t.velocities.assign(3, {});
  const WeightGrid g = WeightGrid::from_targets(t, 4);
  EXPECT_EQ(g.at({1, 1}), 2.0);
  EXPECT_EQ(g.at({0, 3}), 1.0);
  EXPECT_EQ(g.at({0, 0}), 0.0);
}

}  // namespace
}  // namespace covplan
