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

#include <fstream>

#include "covplan/datagen.hpp"
#include "test_dirs.hpp"

namespace covplan {
namespace {

using testing_support::same_tree;
using testing_support::ScratchDir;

TEST(Splits, FloorWithRemainderToTest) {
  const SplitSizes a = split_sizes(40000, {});
  EXPECT_EQ(a.train, 24000u);
  EXPECT_EQ(a.validation, 8000u);
  EXPECT_EQ(a.test, 8000u);
  const SplitSizes b = split_sizes(667, {});
  EXPECT_EQ(b.train, 400u);
  EXPECT_EQ(b.validation, 133u);
  EXPECT_EQ(b.test, 134u);
  SplitFractions bad{0.7, 0.2, 0.2};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Episode, PureFunctionOfSeedAndIndex) {
  ScenarioSpec spec;
  spec.seed = 4;
  EXPECT_EQ(generate_episode(spec, 3), generate_episode(spec, 3));
  EXPECT_FALSE(generate_episode(spec, 3) == generate_episode(spec, 4));
}

TEST(Episode, LabelsMatchIndependentRelabel) {
  ScenarioSpec spec;
  spec.robots = 7;
  for (std::size_t i = 0; i < 15; ++i) {
    const EpisodeRecord r = generate_episode(spec, i);
    ASSERT_EQ(r.targets.size(), kEpisodeSteps);
    ASSERT_EQ(r.count_maps.size(), kEpisodeSteps);
    const PlanResult ex =
        expert_plan(make_planner_input(r.params, r.robots, r.targets[kLabelStep]));
    for (std::size_t k = 0; k < r.robots.size(); ++k) {
      EXPECT_EQ(r.labels[k], static_cast<int>(action_index(*ex.assignment.action(k))));
    }
    EXPECT_EQ(r.expert_coverage, coverage(r.params, r.robots, r.targets[kLabelStep], ex.assignment));
    EXPECT_TRUE(label_consistent(r));
    // Targets advance by one reflected step between stored steps.
    for (std::size_t s = 1; s < kEpisodeSteps; ++s) {
      EXPECT_EQ(r.targets[s], step_targets(r.targets[s - 1], r.params));
    }
    EXPECT_EQ(r.next_occupancy, rasterize_occupancy(r.targets[kLabelStep], r.params.grid_size));
  }
}

TEST(Episode, TamperedLabelIsInconsistent) {
  EpisodeRecord r = generate_episode(ScenarioSpec{}, 0);
  r.labels[0] = (r.labels[0] + 1) % 5;
  EXPECT_FALSE(label_consistent(r));
}

TEST(Episode, LocalMapsAreMaskedCounts) {
  const EpisodeRecord r = generate_episode(ScenarioSpec{}, 2);
  for (std::size_t k = 0; k < r.robots.size(); ++k) {
    EXPECT_EQ(r.windows[k], reachable_window(r.robots.positions[k], r.params));
    const CoverageMap m = r.local_map(k, kLabelStep);
    EXPECT_EQ(m.values, mask_to_window(r.count_maps[kLabelStep], r.windows[k]).values);
    EXPECT_EQ(r.neighbors[k], r.graph().neighbors(k));
  }
}

using DatasetDir = ScratchDir;

TEST_F(DatasetDir, BytesIndependentOfJobs) {
  ScenarioSpec spec;
  spec.seed = 11;
  generate_dataset(dir_ / "a", 7, spec, {}, 1);
  generate_dataset(dir_ / "b", 7, spec, {}, 3);
  EXPECT_TRUE(same_tree(dir_ / "a", dir_ / "b"));
}

TEST_F(DatasetDir, RoundTripAndSplits) {
  ScenarioSpec spec;
  spec.seed = 12;
  const DatasetManifest m = generate_dataset(dir_, 10, spec);
  const Dataset d = load_dataset(dir_);
  EXPECT_EQ(d.manifest.checksum, m.checksum);
  ASSERT_EQ(d.records.size(), 10u);
  EXPECT_EQ(d.train().size(), 6u);
  EXPECT_EQ(d.validation().size(), 2u);
  EXPECT_EQ(d.test().size(), 2u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(d.records[i], generate_episode(spec, i));
}

TEST_F(DatasetDir, MissingManifestAndCorruptionAreErrors) {
  EXPECT_THROW(load_dataset(dir_), std::runtime_error);
  generate_dataset(dir_, 3, ScenarioSpec{});
  {
    std::ofstream f(dir_ / (record_stem(1) + ".bin"), std::ios::binary | std::ios::app);
    f << 'x';
  }
  EXPECT_THROW(load_dataset(dir_), std::runtime_error);
}

TEST(Samples, PlanningSampleShapes) {
  const EpisodeRecord r = generate_episode(ScenarioSpec{}, 1);
  const PlanningSample s = planning_sample(r);
  EXPECT_EQ(s.maps.shape(), (nn::Shape{6, 1, 32, 32}));
  EXPECT_EQ(s.shift.rows(), 6u);
  EXPECT_EQ(s.labels, r.labels);
  const PredictionSample p = prediction_sample(r);
  EXPECT_EQ(p.histories.shape(), (nn::Shape{6, 3, 32, 32}));
  EXPECT_EQ(p.next_occupancy.size(), 6u * 32 * 32);
}

}  // namespace
}  // namespace covplan
