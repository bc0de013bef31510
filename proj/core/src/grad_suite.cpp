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
#include "covplan/grad_suite.hpp"

#include <algorithm>
#include <functional>
#include <memory>

#include "covplan/d2coplan.hpp"
#include "covplan/dmp.hpp"
#include "covplan/nn/layers.hpp"
#include "covplan/nn/loss.hpp"
#include "covplan/rng.hpp"

namespace covplan {
namespace {

using nn::Mode;
using nn::Tensor;
using TensorD = Tensor<double>;

TensorD random_tensor(nn::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  TensorD t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Random linear read-out: loss = sum_i w_i y_i, so d loss / d y = w.
struct Readout {
  TensorD weights;
  double loss(const TensorD& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += weights[i] * y[i];
    return s;
  }
};

Matrix random_shift(std::size_t n, Rng& rng) {
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(0.6)) s(i, j) = s(j, i) = 1.0 / static_cast<double>(n);
    }
  }
  return s;
}

// Checks a Layer w.r.t. its parameters and its input. `make` builds the
// layer; `fresh` re-creates it before every evaluation (dropout masks) and is
// only valid for layers without parameters.
GradSuiteEntry check_layer(const std::string& name, const std::function<std::unique_ptr<nn::Layer<double>>()>& make,
                           nn::Shape input_shape, Mode mode, bool fresh, const nn::GradCheckOptions& opt,
                           std::uint64_t seed) {
  Rng rng(seed);
  auto layer = make();
  layer->init(rng);
  TensorD x = random_tensor(input_shape, rng);
  std::vector<double> dx(x.size());
  const auto params = layer->params(name);
  Readout readout;
  {
    const TensorD y = layer->forward(x, mode);
    readout.weights = random_tensor(y.shape(), rng);
  }
  std::vector<nn::Probe> probes = nn::probes_from(params);
  probes.push_back({name + ".input", x.data(), dx});

  auto objective = [&](bool backward) {
    // Parameter-free stochastic layers are rebuilt so every call sees the
    // same mask.
    if (fresh) layer = make();
    const TensorD y = layer->forward(x, mode);
    nn::Signature sig;
    layer->signature(sig);
    if (backward) {
      for (const auto& p : params) p.tensor->zero_grad();
      const TensorD g = layer->backward(readout.weights);
      std::copy(g.data().begin(), g.data().end(), dx.begin());
    }
    return nn::Evaluation{readout.loss(y), sig.value()};
  };
  return {name, nn::grad_check(probes, objective, opt)};
}

}  // namespace

std::vector<GradSuiteEntry> run_grad_suite(const nn::GradCheckOptions& opt) {
  std::vector<GradSuiteEntry> out;
  using L = std::unique_ptr<nn::Layer<double>>;
  out.push_back(check_layer("conv2d_same", [] { return L(new nn::Conv2d<double>(2, 3, 3, 1, 1)); },
                            {2, 2, 6, 5}, Mode::Train, false, opt, 11));
  out.push_back(check_layer("conv2d_valid_stride2", [] { return L(new nn::Conv2d<double>(2, 3, 3, 2, 0)); },
                            {2, 2, 7, 7}, Mode::Train, false, opt, 12));
  out.push_back(check_layer("maxpool2d", [] { return L(new nn::MaxPool2d<double>(2, 2)); }, {2, 3, 6, 6},
                            Mode::Train, false, opt, 13));
  out.push_back(check_layer("relu", [] { return L(new nn::ReLU<double>()); }, {3, 10}, Mode::Train, false, opt, 14));
  out.push_back(check_layer("dense", [] { return L(new nn::Dense<double>(7, 4)); }, {3, 7}, Mode::Train, false, opt, 15));
  out.push_back(check_layer("dropout", [] { return L(new nn::Dropout<double>(0.3, 99)); }, {4, 6}, Mode::Train, true,
                            opt, 16));
  out.push_back(check_layer("flatten", [] { return L(new nn::Flatten<double>()); }, {2, 2, 3, 3}, Mode::Train, false,
                            opt, 17));

  // Graph filter with two taps beyond the identity.
  {
    Rng rng(18);
    nn::GraphConv<double> gc(5, 3, 2);
    gc.init(rng);
    const Matrix shift = random_shift(4, rng);
    TensorD x = random_tensor({4, 5}, rng);
    std::vector<double> dx(x.size());
    Readout r{random_tensor({4, 3}, rng)};
    auto params = gc.params("graphconv");
    auto probes = nn::probes_from(params);
    probes.push_back({"graphconv.input", x.data(), dx});
    auto objective = [&](bool backward) {
      const TensorD y = gc.forward(x, shift);
      if (backward) {
        for (const auto& p : params) p.tensor->zero_grad();
        const TensorD g = gc.backward(r.weights);
        std::copy(g.data().begin(), g.data().end(), dx.begin());
      }
      return nn::Evaluation{r.loss(y), 0};
    };
    out.push_back({"graphconv_k2", nn::grad_check(probes, objective, opt)});
  }

  // Losses w.r.t. logits.
  {
    Rng rng(19);
    TensorD logits = random_tensor({4, 5}, rng, -2.0, 2.0);
    const std::vector<int> labels = {0, 3, 4, 1};
    std::vector<double> g(logits.size());
    auto objective = [&](bool backward) {
      const auto ce = nn::softmax_cross_entropy(logits, std::span<const int>(labels));
      if (backward) std::copy(ce.grad.data().begin(), ce.grad.data().end(), g.begin());
      return nn::Evaluation{ce.loss, 0};
    };
    std::vector<nn::Probe> probes = {{"softmax_ce.logits", logits.data(), g}};
    out.push_back({"softmax_cross_entropy", nn::grad_check(probes, objective, opt)});
  }
  {
    Rng rng(20);
    TensorD logits = random_tensor({2, 2, 4, 4}, rng, -2.0, 2.0);
    std::vector<float> labels(2 * 16);
    for (float& l : labels) l = rng.bernoulli(0.3) ? 1.0f : 0.0f;
    std::vector<double> g(logits.size());
    auto objective = [&](bool backward) {
      const auto ce = nn::weighted_pixel_ce(logits, std::span<const float>(labels), nn::ClassWeights{1.0, 10.0});
      if (backward) std::copy(ce.grad.data().begin(), ce.grad.data().end(), g.begin());
      return nn::Evaluation{ce.loss, 0};
    };
    std::vector<nn::Probe> probes = {{"pixel_ce.logits", logits.data(), g}};
    out.push_back({"weighted_pixel_ce", nn::grad_check(probes, objective, opt)});
  }
  {
    Rng rng(21);
    TensorD logits = random_tensor({2, 2, 3, 3}, rng, -2.0, 2.0);
    Readout r{random_tensor({2, 1, 3, 3}, rng)};
    std::vector<double> g(logits.size());
    auto objective = [&](bool backward) {
      const TensorD p = nn::occupancy_probability(logits);
      if (backward) {
        const TensorD d = nn::occupancy_probability_backward(p, r.weights);
        std::copy(d.data().begin(), d.data().end(), g.begin());
      }
      return nn::Evaluation{r.loss(p), 0};
    };
    std::vector<nn::Probe> probes = {{"occupancy.logits", logits.data(), g}};
    out.push_back({"occupancy_probability", nn::grad_check(probes, objective, opt)});
  }

  // Small planner, predictor and their composition; Eval mode keeps dropout
  // out of the way (it is checked on its own above).
  D2CoPlanConfig pc;
  pc.grid_size = 8;
  pc.encoder_channels = {2, 3};
  pc.gnn_widths = {6, 4};
  pc.hops = 2;
  DmpConfig dc;
  dc.grid_size = 8;
  dc.channels = {3, 4, 2};
  const std::size_t n = 3;
  const std::vector<int> labels = {0, 2, 4};
  {
    Rng rng(22);
    D2CoPlanNet<double> net(pc, 5);
    net.set_input_grad(true);
    TensorD maps = random_tensor({n, 1, 8, 8}, rng, 0.0, 1.0);
    const Matrix shift = random_shift(n, rng);
    std::vector<double> dmaps(maps.size());
    auto params = net.params();
    auto probes = nn::probes_from(params);
    probes.push_back({"d2coplan.maps", maps.data(), dmaps});
    auto objective = [&](bool backward) {
      const TensorD logits = net.forward(maps, shift, Mode::Eval);
      const auto ce = nn::softmax_cross_entropy(logits, std::span<const int>(labels));
      if (backward) {
        for (const auto& p : params) p.tensor->zero_grad();
        const TensorD g = net.backward(ce.grad);
        std::copy(g.data().begin(), g.data().end(), dmaps.begin());
      }
      return nn::Evaluation{ce.loss, net.signature()};
    };
    out.push_back({"d2coplan", nn::grad_check(probes, objective, opt)});
  }
  {
    Rng rng(23);
    DmpNet<double> net(dc, 6);
    TensorD hist = random_tensor({n, 3, 8, 8}, rng, 0.0, 2.0);
    std::vector<float> labels_px(n * 64);
    for (float& l : labels_px) l = rng.bernoulli(0.2) ? 1.0f : 0.0f;
    auto params = net.params();
    auto probes = nn::probes_from(params);
    auto objective = [&](bool backward) {
      const TensorD logits = net.forward(hist, Mode::Train);
      const auto ce = nn::weighted_pixel_ce(logits, std::span<const float>(labels_px), dc.class_weights);
      if (backward) {
        for (const auto& p : params) p.tensor->zero_grad();
        net.backward(ce.grad);
      }
      return nn::Evaluation{ce.loss, net.signature()};
    };
    out.push_back({"dmp", nn::grad_check(probes, objective, opt)});
  }
  {
    Rng rng(24);
    DmpNet<double> dmp(dc, 7);
    D2CoPlanNet<double> planner(pc, 8);
    PredictPlanChain<double> chain(dmp, planner);
    TensorD hist = random_tensor({n, 3, 8, 8}, rng, 0.0, 2.0);
    TensorD masks({n, 1, 8, 8});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t y = 1; y < 7; ++y) {
        for (std::size_t x = i; x < i + 5; ++x) masks[i * 64 + y * 8 + x] = 1.0;
      }
    }
    // Off-centre owners so the frame shift drops some masked cells off the grid.
    std::vector<Cell> robots;
    for (std::size_t i = 0; i < n; ++i) robots.push_back({static_cast<int>(i) + 1, 2 + static_cast<int>(i % 3)});
    const Matrix shift = random_shift(n, rng);
    auto dparams = dmp.params();
    auto pparams = planner.params();
    auto probes = nn::probes_from(dparams);
    for (const auto& p : nn::probes_from(pparams)) probes.push_back(p);
    auto objective = [&](bool backward) {
      const TensorD logits = chain.forward(hist, masks, robots, shift, Mode::Train, Mode::Eval);
      const auto ce = nn::softmax_cross_entropy(logits, std::span<const int>(labels));
      if (backward) {
        for (const auto& p : dparams) p.tensor->zero_grad();
        for (const auto& p : pparams) p.tensor->zero_grad();
        chain.backward(ce.grad);
      }
      return nn::Evaluation{ce.loss, chain.signature()};
    };
    out.push_back({"dmp_to_d2coplan_chain", nn::grad_check(probes, objective, opt)});
  }
  return out;
}

bool all_passed(const std::vector<GradSuiteEntry>& entries) {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(),
                                         [](const GradSuiteEntry& e) { return e.report.passed(); });
}

double max_rel_error(const std::vector<GradSuiteEntry>& entries) {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.report.max_rel_error);
  return m;
}

}  // namespace covplan
