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

#include <numeric>

#include "covplan/d2coplan.hpp"
#include "covplan/datagen.hpp"
#include "covplan/rng.hpp"

namespace covplan {
namespace {

D2CoPlanConfig small_config() {
  D2CoPlanConfig c;
  c.encoder_channels = {2, 4, 8};
  c.gnn_widths = {16, 8};
  return c;
}

std::vector<EpisodeRecord> records(std::size_t count, std::uint64_t seed, std::size_t robots = 6) {
  ScenarioSpec spec;
  spec.robots = robots;
  spec.seed = seed;
  std::vector<EpisodeRecord> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_episode(spec, i));
  return out;
}

TEST(Config, FeatureLengths) {
  EXPECT_EQ(D2CoPlanConfig::desk().feature_length(), 256u);
  EXPECT_EQ(D2CoPlanConfig::paper().feature_length(), 1600u);
  EXPECT_EQ(D2CoPlanConfig::paper().gnn_widths, (std::vector<std::size_t>{512, 128}));
  D2CoPlanConfig bad;
  bad.encoder_channels.clear();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Argmax, TiesGoToEarliestAction) {
  const std::vector<float> logits = {0.5f, 2.0f, 2.0f, -1.0f, 2.0f};
  EXPECT_EQ(argmax_action(logits), 1u);
}

TEST(Frame, RecentrePutsRobotOnCentreAndIsAdjoint) {
  constexpr int g = 9;
  Rng rng(31);
  std::vector<double> a(g * g), b(g * g), ra(g * g), bb(g * g);
  for (auto& v : a) v = rng.uniform();
  for (auto& v : b) v = rng.uniform();
  for (const Cell robot : {Cell{4, 4}, Cell{0, 0}, Cell{8, 3}, Cell{2, 7}}) {
    recentre(a.data(), ra.data(), g, robot);
    EXPECT_EQ(ra[(g / 2) * g + g / 2], a[robot.y * g + robot.x]);
    recentre_backward(b.data(), bb.data(), g, robot);
    double lhs = 0.0;
    double rhs = 0.0;
    for (int c = 0; c < g * g; ++c) {
      lhs += ra[c] * b[c];
      rhs += a[c] * bb[c];
    }
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
  recentre(a.data(), ra.data(), g, Cell{0, 0});
  EXPECT_EQ(ra[0], 0.0);
}

TEST(Network, PerRobotInferenceMatchesBatched) {
  D2CoPlanNet<float> net(small_config(), 3);
  for (const EpisodeRecord& rec : records(5, 9)) {
    const auto maps = rec.local_maps(kLabelStep);
    const CommGraph g = rec.graph();
    const D2CoPlanPlan plan = d2coplan_plan(net, maps, g);
    const nn::Tensor<float> logits = net.forward(stack_recentred(maps, g.positions), normalize(g).shift, nn::Mode::Eval);
    for (std::size_t i = 0; i < maps.size(); ++i) {
      for (std::size_t a = 0; a < kActionCount; ++a) {
        EXPECT_NEAR(plan.logits[i][a], logits[i * kActionCount + a], 1e-5);
      }
      EXPECT_EQ(plan.result.assignment.action(i), kActions[argmax_action(plan.logits[i])]);
    }
    EXPECT_EQ(plan.result.robot_latency.size(), maps.size());
  }
}

TEST(Network, PermutationEquivariantAssignments) {
  D2CoPlanNet<float> net(small_config(), 5);
  Rng rng(12);
  for (const EpisodeRecord& rec : records(4, 21, 8)) {
    const auto maps = rec.local_maps(kLabelStep);
    const D2CoPlanPlan base = d2coplan_plan(net, maps, rec.graph());
    for (int t = 0; t < 10; ++t) {
      std::vector<std::size_t> perm(maps.size());
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
      RobotState robots;
      std::vector<CoverageMap> pmaps;
      for (std::size_t i : perm) {
        robots.positions.push_back(rec.robots.positions[i]);
        pmaps.push_back(maps[i]);
      }
      const D2CoPlanPlan p = d2coplan_plan(net, pmaps, build_graph(robots, rec.params.comm_range));
      for (std::size_t k = 0; k < perm.size(); ++k) {
        EXPECT_EQ(p.result.assignment.action(k), base.result.assignment.action(perm[k]));
        for (std::size_t a = 0; a < kActionCount; ++a) {
          EXPECT_NEAR(p.logits[k][a], base.logits[perm[k]][a], 1e-4);
        }
      }
    }
  }
}

TEST(Network, DropoutOnlyInTrainMode) {
  D2CoPlanNet<float> net(small_config(), 5);
  const EpisodeRecord rec = records(1, 2)[0];
  const PlanningSample s = planning_sample(rec);
  const auto a = net.forward(s.maps, s.shift, nn::Mode::Eval);
  const auto b = net.forward(s.maps, s.shift, nn::Mode::Eval);
  EXPECT_EQ(a.data()[0], b.data()[0]);
  const auto c = net.forward(s.maps, s.shift, nn::Mode::Train);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i] != c[i];
  EXPECT_TRUE(differs);
}

TEST(Training, LossDecreasesAndIsDeterministic) {
  const auto train_recs = records(24, 31);
  const auto val_recs = records(8, 32);
  const auto train = planning_samples(train_recs);
  const auto val = planning_samples(val_recs);
  TrainConfig tc;
  tc.epochs = 6;
  tc.batch_instances = 4;
  tc.learning_rate = 3e-3;
  const TrainResult a = train_imitation(train, val, small_config(), tc);
  ASSERT_EQ(a.log.size(), 7u);
  EXPECT_EQ(a.log[0].epoch, 0);
  EXPECT_LT(a.log.back().train_loss, a.log[1].train_loss);
  EXPECT_LE(a.best_val_loss, a.log[0].val_loss);
  const TrainResult b = train_imitation(train, val, small_config(), tc);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  EXPECT_NO_THROW(load_d2coplan(a.weights, small_config()));
  EXPECT_THROW(load_d2coplan(a.weights, D2CoPlanConfig::desk()), std::runtime_error);
}

TEST(Training, EmptyTrainingSetThrows) {
  EXPECT_THROW(train_imitation({}, {}, small_config(), TrainConfig{}), std::invalid_argument);
}

TEST(Planner, WrapsNetwork) {
  auto net = std::make_shared<D2CoPlanNet<float>>(small_config(), 1);
  D2CoPlanPlanner planner(net);
  const EpisodeRecord rec = records(1, 4)[0];
  const PlanResult r = planner.plan(rec.planner_input());
  EXPECT_TRUE(r.assignment.complete());
  EXPECT_TRUE(planner.decentralized());
}

}  // namespace
}  // namespace covplan
