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

#include <cmath>

#include "covplan/datagen.hpp"
#include "covplan/dmp.hpp"
#include "covplan/nn/optim.hpp"

namespace covplan {
namespace {

DmpConfig small_dmp() {
  DmpConfig c;
  c.channels = {4, 2};
  return c;
}

D2CoPlanConfig small_planner() {
  D2CoPlanConfig c;
  c.encoder_channels = {2, 4, 8};
  c.gnn_widths = {16, 8};
  return c;
}

std::vector<PredictionSample> samples(std::size_t count, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.seed = seed;
  std::vector<EpisodeRecord> recs;
  for (std::size_t i = 0; i < count; ++i) recs.push_back(generate_episode(spec, i));
  return prediction_samples(recs);
}

bool differs(const nn::WeightStore& a, const nn::WeightStore& b) {
  return !(a.tensors == b.tensors);
}

TEST(Dmp, ShapePreservedAcrossGridSizes) {
  for (int g : {8, 16, 32, 33}) {
    DmpConfig c;
    c.grid_size = g;
    DmpNet<float> net(c, 1);
    const nn::Tensor<float> x({2, 3, static_cast<std::size_t>(g), static_cast<std::size_t>(g)}, 0.5f);
    const OccupancyPrediction p = predict_map(net, x);
    EXPECT_EQ(p.logits.shape(), (nn::Shape{2, 2, std::size_t(g), std::size_t(g)}));
    EXPECT_EQ(p.probability.shape(), (nn::Shape{2, 1, std::size_t(g), std::size_t(g)}));
  }
}

TEST(Dmp, ProbabilityIsTwoClassSoftmax) {
  DmpNet<float> net(DmpConfig{}, 2);
  const auto s = samples(1, 3);
  const OccupancyPrediction p = predict_map(net, s[0].histories);
  const std::size_t plane = 32 * 32;
  for (std::size_t b = 0; b < s[0].histories.dim(0); ++b) {
    for (std::size_t i = 0; i < plane; i += 37) {
      const double l0 = p.logits[(b * 2) * plane + i];
      const double l1 = p.logits[(b * 2 + 1) * plane + i];
      const double expected = 1.0 / (1.0 + std::exp(l0 - l1));
      EXPECT_NEAR(p.probability[b * plane + i], expected, 1e-6);
      EXPECT_GE(p.probability[b * plane + i], 0.0f);
      EXPECT_LE(p.probability[b * plane + i], 1.0f);
    }
  }
}

TEST(Dmp, ConfigArchitectureAndValidation) {
  EXPECT_NE(DmpConfig{}.architecture(), small_dmp().architecture());
  DmpConfig bad;
  bad.channels = {8, 3};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_EQ(parse_regime("frozen-downstream"), DmpRegime::FrozenDownstream);
  EXPECT_EQ(regime_name(DmpRegime::Joint), "joint");
  EXPECT_THROW(parse_regime("nope"), std::invalid_argument);
}

TEST(Dmp, SampleMasksAndLabelsStayInsideWindows) {
  const auto s = samples(2, 5);
  for (const PredictionSample& p : s) {
    const std::size_t n = p.histories.dim(0), plane = 32 * 32;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < plane; ++i) {
        if (p.window_masks[r * plane + i] == 0.0f) {
          EXPECT_EQ(p.next_occupancy[r * plane + i], 0.0f);
          for (std::size_t h = 0; h < 3; ++h) EXPECT_EQ(p.histories[(r * 3 + h) * plane + i], 0.0f);
        }
      }
    }
  }
}

// Best constant predictor for the weighted loss q* = w1 n1 / (w1 n1 + w0 n0).
double best_constant_loss(std::span<const PredictionSample> s, nn::ClassWeights w) {
  double n0 = 0.0, n1 = 0.0;
  for (const auto& p : s)
    for (float v : p.next_occupancy) (v != 0.0f ? n1 : n0) += 1.0;
  const double q = w.occupied * n1 / (w.occupied * n1 + w.free * n0);
  return -(w.occupied * n1 * std::log(q) + w.free * n0 * std::log(1.0 - q)) / (n0 + n1);
}

TEST(Dmp, StandaloneTrainingBeatsInitAndBestConstant) {
  const auto train = samples(12, 7);
  DmpTrainConfig tc;
  tc.epochs = 15;
  tc.learning_rate = 3e-3;
  DmpNet<float> init(small_dmp(), tc.seed);
  const double before = dmp_pixel_loss(init, train);
  const DmpTrainResult r = train_dmp_standalone(train, small_dmp(), tc);
  auto trained = load_dmp(r.dmp, small_dmp());
  const double after = dmp_pixel_loss(*trained, train);
  EXPECT_LT(after, before);
  EXPECT_LT(after, best_constant_loss(train, small_dmp().class_weights));
  EXPECT_EQ(r.log.size(), 16u);
}

TEST(Dmp, ClassWeightsChangeTheSolution) {
  const auto train = samples(4, 8);
  DmpTrainConfig tc;
  tc.epochs = 2;
  DmpConfig even = small_dmp();
  even.class_weights = {1.0, 1.0};
  const DmpTrainResult a = train_dmp_standalone(train, small_dmp(), tc);
  const DmpTrainResult b = train_dmp_standalone(train, even, tc);
  EXPECT_TRUE(differs(a.dmp, b.dmp));
}

TEST(Dmp, ChainGradientReachesPredictor) {
  const auto s = samples(1, 9);
  DmpNet<float> dmp(small_dmp(), 1);
  D2CoPlanNet<float> planner(small_planner(), 2);
  PredictPlanChain<float> chain(dmp, planner);
  nn::zero_grads(dmp.params());
  const auto logits = chain.forward(s[0].histories, s[0].window_masks, s[0].robots, s[0].shift, nn::Mode::Train,
                                    nn::Mode::Eval);
  const auto loss = nn::softmax_cross_entropy(logits, s[0].labels);
  chain.backward(loss.grad);
  double norm = 0.0;
  for (const auto& p : dmp.params())
    for (float g : p.tensor->grad()) norm += std::abs(g);
  EXPECT_GT(norm, 0.0);
}

TEST(Dmp, FrozenDownstreamKeepsPlannerBitIdentical) {
  const auto train = samples(4, 10);
  D2CoPlanNet<float> planner(small_planner(), 3);
  const nn::WeightStore frozen = nn::capture(planner.params(), planner.architecture(), 3);
  DmpTrainConfig tc;
  tc.epochs = 2;
  int calls = 0;
  const DmpTrainResult r = train_dmp_downstream(
      train, frozen, small_planner(), small_dmp(), tc,
      [&](int, DmpNet<float>&, D2CoPlanNet<float>* p) {
        ASSERT_NE(p, nullptr);
        EXPECT_EQ(nn::capture(p->params(), p->architecture(), 3).tensors, frozen.tensors);
        ++calls;
      });
  EXPECT_EQ(calls, 3);
  DmpNet<float> init(small_dmp(), tc.seed);
  EXPECT_TRUE(differs(r.dmp, nn::capture(init.params(), init.architecture(), tc.seed)));
}

TEST(Dmp, JointTrainingChangesBothNetworks) {
  const auto train = samples(4, 11);
  DmpTrainConfig tc;
  tc.epochs = 2;
  const DmpTrainResult r = train_joint(train, small_planner(), small_dmp(), tc, 4);
  DmpNet<float> dmp0(small_dmp(), tc.seed);
  D2CoPlanNet<float> plan0(small_planner(), 4);
  EXPECT_TRUE(differs(r.dmp, nn::capture(dmp0.params(), dmp0.architecture(), 0)));
  EXPECT_TRUE(differs(r.planner, nn::capture(plan0.params(), plan0.architecture(), 0)));
}

TEST(Dmp, PredictedMapsAreMaskedProbabilities) {
  ScenarioSpec spec;
  const EpisodeRecord rec = generate_episode(spec, 0);
  const PredictionSample s = prediction_sample(rec);
  DmpNet<float> net(small_dmp(), 1);
  const auto maps = predicted_local_maps(net, s, rec.windows);
  ASSERT_EQ(maps.size(), rec.robots.size());
  for (std::size_t r = 0; r < maps.size(); ++r) {
    const Window& w = rec.windows[r];
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const bool inside = x >= w.x0 && x <= w.x1 && y >= w.y0 && y <= w.y1;
        if (inside) {
          EXPECT_GT(maps[r].at(x, y), 0.0f);
        } else {
          EXPECT_EQ(maps[r].at(x, y), 0.0f);
        }
      }
  }
}

}  // namespace
}  // namespace covplan
