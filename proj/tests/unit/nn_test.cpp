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
#include <filesystem>
#include <fstream>
#include <string>

#include "covplan/comms.hpp"
#include "covplan/grad_suite.hpp"
#include "covplan/nn/layers.hpp"
#include "covplan/nn/loss.hpp"
#include "covplan/nn/optim.hpp"
#include "covplan/nn/weights.hpp"
#include "covplan/rng.hpp"

namespace covplan::nn {
namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng) {
  Tensor<double> t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Direct-summation convolution with zero padding.
double naive_conv(const Tensor<double>& x, Tensor<double>& w, Tensor<double>& b, std::size_t n,
                  std::size_t o, std::size_t oy, std::size_t ox, std::size_t stride,
                  std::size_t pad) {
  double s = b[o];
  const std::size_t cin = x.dim(1), h = x.dim(2), wd = x.dim(3), k = w.dim(2);
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
        const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
        if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
        s += w[((o * cin + c) * k + ky) * k + kx] *
             x[((n * cin + c) * h + static_cast<std::size_t>(iy)) * wd + static_cast<std::size_t>(ix)];
      }
    }
  }
  return s;
}

struct ConvCase {
  std::size_t stride;
  std::size_t pad;
};

class ConvOracle : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvOracle, MatchesDirectSum) {
  const ConvCase c = GetParam();
  Rng rng(3);
  Conv2d<double> conv(2, 3, 3, c.stride, c.pad);
  conv.init(rng);
  for (double& v : conv.bias().data()) v = rng.uniform(-1.0, 1.0);
  const Tensor<double> x = random_tensor({2, 2, 7, 6}, rng);
  const Tensor<double> y = conv.forward(x, Mode::Eval);
  ASSERT_EQ(y.dim(2), (7 + 2 * c.pad - 3) / c.stride + 1);
  ASSERT_EQ(y.dim(3), (6 + 2 * c.pad - 3) / c.stride + 1);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t o = 0; o < 3; ++o)
      for (std::size_t oy = 0; oy < y.dim(2); ++oy)
        for (std::size_t ox = 0; ox < y.dim(3); ++ox)
          EXPECT_NEAR(y[((n * 3 + o) * y.dim(2) + oy) * y.dim(3) + ox],
                      naive_conv(x, conv.weight(), conv.bias(), n, o, oy, ox, c.stride, c.pad),
                      1e-12);
}

INSTANTIATE_TEST_SUITE_P(Shapes, ConvOracle,
                         ::testing::Values(ConvCase{1, 0}, ConvCase{1, 1}, ConvCase{2, 0},
                                           ConvCase{2, 1}),
                         [](const ::testing::TestParamInfo<ConvCase>& info) {
                           return "Stride" + std::to_string(info.param.stride) + "Pad" +
                                  std::to_string(info.param.pad);
                         });

TEST(Conv, RejectsWrongChannelsAndTinyInput) {
  Conv2d<double> conv(2, 3, 3);
  EXPECT_THROW(conv.forward(Tensor<double>({1, 1, 5, 5}), Mode::Eval), std::invalid_argument);
  EXPECT_THROW(conv.forward(Tensor<double>({1, 2, 2, 2}), Mode::Eval), std::invalid_argument);
}

TEST(MaxPool, MatchesWindowMax) {
  Rng rng(4);
  MaxPool2d<double> pool;
  const Tensor<double> x = random_tensor({1, 2, 5, 4}, rng);
  const Tensor<double> y = pool.forward(x, Mode::Eval);
  ASSERT_EQ(y.shape(), (Shape{1, 2, 2, 2}));
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t oy = 0; oy < 2; ++oy)
      for (std::size_t ox = 0; ox < 2; ++ox) {
        double m = -1e9;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx)
            m = std::max(m, x[(c * 5 + 2 * oy + dy) * 4 + 2 * ox + dx]);
        EXPECT_EQ(y[(c * 2 + oy) * 2 + ox], m);
      }
}

TEST(Dense, MatchesMatrixProduct) {
  Rng rng(5);
  Dense<double> d(3, 2);
  d.init(rng);
  for (double& v : d.bias().data()) v = rng.uniform(-1.0, 1.0);
  const Tensor<double> x = random_tensor({4, 3}, rng);
  const Tensor<double> y = d.forward(x, Mode::Eval);
  const Shape ws = d.weight().shape();
  for (std::size_t b = 0; b < 4; ++b)
    for (std::size_t o = 0; o < 2; ++o) {
      double s = d.bias()[o];
      for (std::size_t i = 0; i < 3; ++i) {
        s += x[b * 3 + i] * (ws[0] == 3 ? d.weight()[i * 2 + o] : d.weight()[o * 3 + i]);
      }
      EXPECT_NEAR(y[b * 2 + o], s, 1e-12);
    }
}

TEST(Dropout, IdentityInEvalAndInvertedScaleInTrain) {
  Dropout<double> drop(0.25, 7);
  Tensor<double> x({1000}, 1.0);
  EXPECT_EQ(drop.forward(x, Mode::Eval).data()[17], 1.0);
  const Tensor<double> y = drop.forward(x, Mode::Train);
  std::size_t kept = 0;
  for (double v : y.data()) {
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-12);
    kept += v != 0.0;
  }
  EXPECT_NEAR(static_cast<double>(kept) / 1000.0, 0.75, 0.05);
}

TEST(GraphConv, MatchesPowerReference) {
  Rng rng(6);
  Matrix s(4, 4);
  s(0, 1) = s(1, 0) = 0.5;
  s(1, 2) = s(2, 1) = 0.5;
  s(2, 3) = s(3, 2) = 0.5;
  GraphConv<double> g(3, 2, 2);
  g.init(rng);
  const Tensor<double> x = random_tensor({4, 3}, rng);
  const Tensor<double> y = g.forward(x, s);
  const std::vector<Matrix> powers = {Matrix::identity(4), s, multiply(s, s)};
  const std::vector<Tensor<double>> taps = {g.tap(0), g.tap(1), g.tap(2)};
  const Tensor<double> ref = graphconv_forward(x, powers, taps);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t o = 0; o < 2; ++o) EXPECT_NEAR(y[i * 2 + o], ref[i * 2 + o] + g.bias()[o], 1e-12);
  EXPECT_THROW(graphconv_forward(x, {Matrix::identity(4)}, taps), std::invalid_argument);
}

TEST(Loss, UniformLogitsGiveLogFive) {
  const Tensor<double> logits({3, 5}, 0.7);
  const std::vector<int> labels = {0, 2, 4};
  const auto r = softmax_cross_entropy(logits, labels);
  EXPECT_NEAR(r.loss, std::log(5.0), 1e-12);
  EXPECT_NEAR(r.grad[0], (0.2 - 1.0) / 3.0, 1e-12);
  EXPECT_NEAR(r.grad[1], 0.2 / 3.0, 1e-12);
  const std::vector<int> bad = {0, 5, 1};
  EXPECT_THROW(softmax_cross_entropy(logits, bad), std::invalid_argument);
}

TEST(Loss, WeightedPixelClosedForm) {
  // Zero logits: every pixel costs w * log 2.
  const Tensor<double> logits({1, 2, 2, 2}, 0.0);
  const std::vector<float> labels = {1, 0, 0, 0};
  const auto r = weighted_pixel_ce(logits, labels, ClassWeights{1.0, 10.0});
  EXPECT_NEAR(r.loss, (10.0 + 3.0) / 4.0 * std::log(2.0), 1e-12);
  const auto even = weighted_pixel_ce(logits, labels, ClassWeights{1.0, 1.0});
  EXPECT_NEAR(even.loss, std::log(2.0), 1e-12);
  const std::vector<float> nonbinary = {0.5f, 0, 0, 0};
  EXPECT_THROW(weighted_pixel_ce(logits, nonbinary, ClassWeights{}), std::invalid_argument);
}

TEST(GradSuite, AllEntriesPass) {
  const auto entries = run_grad_suite();
  EXPECT_GE(entries.size(), 12u);
  for (const auto& e : entries) {
    EXPECT_TRUE(e.report.passed()) << e.name << ": " << e.report.summary();
    EXPECT_GT(e.report.checked, 0u) << e.name;
  }
  EXPECT_TRUE(all_passed(entries));
  EXPECT_LT(max_rel_error(entries), 1e-4);
}

TEST(GradCheck, DetectsWrongGradient) {
  std::vector<double> x = {0.3, -0.7};
  std::vector<double> g = {0.0, 0.0};
  std::vector<Probe> probes = {{"x", x, g}};
  const auto report = grad_check(probes, [&](bool with_backward) {
    if (with_backward) {
      g[0] = 2.0 * x[0];
      g[1] = 5.0;  // wrong on purpose
    }
    return Evaluation{x[0] * x[0] + x[1] * x[1], 0};
  });
  EXPECT_FALSE(report.passed());
}

TEST(Adam, MinimizesQuadratic) {
  Tensor<double> w({2}, 3.0);
  w.enable_grad();
  std::vector<NamedParam<double>> params = {{"w", &w}};
  Adam<double> opt(0.1);
  for (int i = 0; i < 500; ++i) {
    zero_grads(params);
    for (std::size_t k = 0; k < 2; ++k) w.grad()[k] = 2.0 * (w[k] - 1.0);
    opt.step(params);
  }
  EXPECT_NEAR(w[0], 1.0, 1e-3);
}

class WeightsFile : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("covplan_weights_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(WeightsFile, RoundTripIsExact) {
  Rng rng(1);
  Dense<float> d(4, 3);
  d.init(rng);
  const WeightStore store = capture(d.params("fc"), "dense(4,3)", 42);
  store.save(dir_ / "w");
  const WeightStore back = WeightStore::load(dir_ / "w");
  EXPECT_EQ(back, store);
  Dense<float> other(4, 3);
  restore(back, other.params("fc"), "dense(4,3)");
  for (std::size_t i = 0; i < other.weight().size(); ++i) EXPECT_EQ(other.weight()[i], d.weight()[i]);
}

TEST_F(WeightsFile, ArchitectureMismatchRefusesToLoad) {
  Rng rng(1);
  Dense<float> d(4, 3);
  d.init(rng);
  const WeightStore store = capture(d.params("fc"), "dense(4,3)", 1);
  EXPECT_THROW(restore(store, d.params("fc"), "dense(4,4)"), std::runtime_error);
  Dense<float> wrong(4, 2);
  EXPECT_THROW(restore(store, wrong.params("fc"), "dense(4,3)"), std::runtime_error);
}

TEST_F(WeightsFile, CorruptBlobIsDetected) {
  Rng rng(1);
  Dense<float> d(4, 3);
  d.init(rng);
  capture(d.params("fc"), "dense(4,3)", 1).save(dir_ / "w");
  {
    std::fstream f(dir_ / "w.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(5);
    f.put('\x7f');
  }
  EXPECT_THROW(WeightStore::load(dir_ / "w"), std::runtime_error);
  EXPECT_THROW(WeightStore::load(dir_ / "missing"), std::runtime_error);
}

}  // namespace
}  // namespace covplan::nn
