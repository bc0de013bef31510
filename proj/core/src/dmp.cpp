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
#include "covplan/dmp.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "covplan/nn/optim.hpp"

namespace covplan {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_samples(std::span<const PredictionSample> samples, const DmpConfig& config, const char* who) {
  if (samples.empty()) throw std::invalid_argument(std::string(who) + ": empty dataset");
  const auto g = static_cast<std::size_t>(config.grid_size);
  for (const PredictionSample& s : samples) {
    const std::size_t n = s.labels.size();
    if (s.histories.rank() != 4 || s.histories.dim(0) != n || s.histories.dim(1) != config.history ||
        s.histories.dim(2) != g || s.histories.dim(3) != g) {
      throw std::invalid_argument(std::string(who) + ": history shape " +
                                  nn::shape_string(s.histories.shape()) + " does not match the config");
    }
    if (s.next_occupancy.size() != n * g * g || s.window_masks.size() != n * g * g) {
      throw std::invalid_argument(std::string(who) + ": label or mask size mismatch");
    }
  }
}

std::vector<std::size_t> shuffled(std::size_t count, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(epoch)));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

// Shared loop for the two action-loss regimes. The planner is updated only
// when `planner_params` is non-empty.
DmpTrainResult train_through_planner(std::span<const PredictionSample> train, DmpNet<float>& dmp,
                                     D2CoPlanNet<float>& planner, bool joint,
                                     const DmpTrainConfig& tc, const DmpEpochHook& on_epoch) {
  PredictPlanChain<float> chain(dmp, planner);
  const auto dmp_params = dmp.params();
  const auto planner_params = planner.params();
  auto params = dmp_params;
  if (joint) params.insert(params.end(), planner_params.begin(), planner_params.end());
  nn::Adam<float> adam(tc.learning_rate);
  const nn::Mode planner_mode = joint ? nn::Mode::Train : nn::Mode::Eval;
  const auto start = Clock::now();
  const std::size_t batch = std::max<std::size_t>(tc.batch_instances, 1);

  DmpTrainResult result;
  if (on_epoch) on_epoch(0, dmp, &planner);
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    const auto order = shuffled(train.size(), tc.seed, epoch);
    double loss_sum = 0.0;
    std::size_t rows_seen = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
      const std::size_t b1 = std::min(order.size(), b0 + batch);
      std::size_t batch_rows = 0;
      for (std::size_t b = b0; b < b1; ++b) batch_rows += train[order[b]].labels.size();
      nn::zero_grads(dmp_params);
      nn::zero_grads(planner_params);
      for (std::size_t b = b0; b < b1; ++b) {
        const PredictionSample& s = train[order[b]];
        const nn::Tensor<float> logits =
            chain.forward(s.histories, s.window_masks, s.robots, s.shift, nn::Mode::Train, planner_mode);
        auto ce = nn::softmax_cross_entropy(logits, std::span<const int>(s.labels));
        const double scale = static_cast<double>(s.labels.size()) / static_cast<double>(batch_rows);
        for (float& g : ce.grad.data()) g = static_cast<float>(g * scale);
        chain.backward(ce.grad);
        loss_sum += ce.loss * static_cast<double>(s.labels.size());
      }
      rows_seen += batch_rows;
      adam.step(params);
    }
    result.log.push_back({epoch, loss_sum / static_cast<double>(rows_seen), 0.0, 0.0, seconds_since(start)});
    if (on_epoch) on_epoch(epoch, dmp, &planner);
  }
  return result;
}

}  // namespace

void DmpConfig::validate() const {
  if (grid_size < 1) throw std::invalid_argument("dmp config: grid_size must be positive");
  if (history != 3) throw std::invalid_argument("dmp config: history must be exactly 3 steps");
  if (channels.empty() || channels.back() != 2) {
    throw std::invalid_argument("dmp config: last layer must have 2 channels");
  }
  for (std::size_t c : channels) {
    if (c == 0) throw std::invalid_argument("dmp config: channels must be positive");
  }
  if (kernel == 0 || kernel % 2 == 0) throw std::invalid_argument("dmp config: kernel must be odd");
  if (!(class_weights.free > 0.0 && class_weights.occupied > 0.0)) {
    throw std::invalid_argument("dmp config: class weights must be positive");
  }
}

std::string DmpConfig::architecture() const {
  std::string s = "dmp;in=" + std::to_string(history) + ";ch=";
  for (std::size_t c : channels) s += std::to_string(c) + ",";
  return s + ";k=" + std::to_string(kernel) + ";same";
}

std::string_view regime_name(DmpRegime regime) {
  switch (regime) {
    case DmpRegime::Joint: return "joint";
    case DmpRegime::Separate: return "separate";
    case DmpRegime::FrozenDownstream: return "frozen-downstream";
  }
  return "?";
}

DmpRegime parse_regime(std::string_view name) {
  if (name == "joint") return DmpRegime::Joint;
  if (name == "separate") return DmpRegime::Separate;
  if (name == "frozen-downstream") return DmpRegime::FrozenDownstream;
  throw std::invalid_argument("unknown dmp regime '" + std::string(name) + "'");
}

OccupancyPrediction predict_map(DmpNet<float>& net, const nn::Tensor<float>& histories) {
  OccupancyPrediction out;
  out.logits = net.forward(histories, nn::Mode::Eval);
  out.probability = nn::occupancy_probability(out.logits);
  return out;
}

std::vector<CoverageMap> predicted_local_maps(DmpNet<float>& net, const PredictionSample& sample,
                                              std::span<const Window> windows) {
  const std::size_t n = sample.labels.size();
  if (windows.size() != n) throw std::invalid_argument("predicted_local_maps: window count mismatch");
  const OccupancyPrediction p = predict_map(net, sample.histories);
  const int g = net.config().grid_size;
  const std::size_t plane = static_cast<std::size_t>(g) * g;
  std::vector<CoverageMap> maps;
  maps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CoverageMap m(g);
    for (std::size_t c = 0; c < plane; ++c) {
      m.values[c] = p.probability[i * plane + c] * sample.window_masks[i * plane + c];
    }
    m.window = windows[i];
    maps.push_back(std::move(m));
  }
  return maps;
}

double dmp_pixel_loss(DmpNet<float>& net, std::span<const PredictionSample> samples) {
  double sum = 0.0;
  std::size_t rows = 0;
  for (const PredictionSample& s : samples) {
    const nn::Tensor<float> logits = net.forward(s.histories, nn::Mode::Eval);
    const auto ce = nn::weighted_pixel_ce(logits, std::span<const float>(s.next_occupancy),
                                          net.config().class_weights);
    sum += ce.loss * static_cast<double>(s.labels.size());
    rows += s.labels.size();
  }
  return rows ? sum / static_cast<double>(rows) : 0.0;
}

DmpTrainResult train_dmp_standalone(std::span<const PredictionSample> train, const DmpConfig& config,
                                    const DmpTrainConfig& tc, const DmpEpochHook& on_epoch) {
  config.validate();
  check_samples(train, config, "train_dmp_standalone");
  if (tc.epochs < 1) throw std::invalid_argument("train_dmp_standalone: epochs must be >= 1");
  DmpNet<float> net(config, tc.seed);
  const auto params = net.params();
  nn::Adam<float> adam(tc.learning_rate);
  const auto start = Clock::now();
  const std::size_t batch = std::max<std::size_t>(tc.batch_instances, 1);

  DmpTrainResult result;
  result.log.push_back({0, dmp_pixel_loss(net, train), 0.0, 0.0, seconds_since(start)});
  if (on_epoch) on_epoch(0, net, nullptr);
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    const auto order = shuffled(train.size(), tc.seed, epoch);
    double loss_sum = 0.0;
    std::size_t rows_seen = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
      const std::size_t b1 = std::min(order.size(), b0 + batch);
      std::size_t batch_rows = 0;
      for (std::size_t b = b0; b < b1; ++b) batch_rows += train[order[b]].labels.size();
      nn::zero_grads(params);
      for (std::size_t b = b0; b < b1; ++b) {
        const PredictionSample& s = train[order[b]];
        const nn::Tensor<float> logits = net.forward(s.histories, nn::Mode::Train);
        auto ce = nn::weighted_pixel_ce(logits, std::span<const float>(s.next_occupancy), config.class_weights);
        const double scale = static_cast<double>(s.labels.size()) / static_cast<double>(batch_rows);
        for (float& g : ce.grad.data()) g = static_cast<float>(g * scale);
        net.backward(ce.grad);
        loss_sum += ce.loss * static_cast<double>(s.labels.size());
      }
      rows_seen += batch_rows;
      adam.step(params);
    }
    result.log.push_back({epoch, loss_sum / static_cast<double>(rows_seen), 0.0, 0.0, seconds_since(start)});
    if (on_epoch) on_epoch(epoch, net, nullptr);
  }
  result.dmp = nn::capture(params, net.architecture(), tc.seed);
  result.dmp.metadata = {{"kind", "dmp"}, {"regime", "separate"}, {"epochs", tc.epochs},
                         {"class_weight_free", config.class_weights.free},
                         {"class_weight_occupied", config.class_weights.occupied},
                         {"final_loss", result.log.back().train_loss}};
  return result;
}

DmpTrainResult train_dmp_downstream(std::span<const PredictionSample> train,
                                    const nn::WeightStore& planner_weights,
                                    const D2CoPlanConfig& planner_config, const DmpConfig& config,
                                    const DmpTrainConfig& tc, const DmpEpochHook& on_epoch) {
  config.validate();
  check_samples(train, config, "train_dmp_downstream");
  if (tc.epochs < 1) throw std::invalid_argument("train_dmp_downstream: epochs must be >= 1");
  if (planner_config.grid_size != config.grid_size) {
    throw std::invalid_argument("train_dmp_downstream: planner and predictor grid sizes differ");
  }
  auto planner = load_d2coplan(planner_weights, planner_config);
  const auto before = nn::snapshot(planner->params());
  DmpNet<float> dmp(config, tc.seed);
  DmpTrainResult result = train_through_planner(train, dmp, *planner, false, tc, on_epoch);
  if (nn::snapshot(planner->params()) != before) {
    throw std::logic_error("train_dmp_downstream: frozen planner parameters changed");
  }
  result.dmp = nn::capture(dmp.params(), dmp.architecture(), tc.seed);
  result.dmp.metadata = {{"kind", "dmp"}, {"regime", "frozen-downstream"}, {"epochs", tc.epochs},
                         {"planner_architecture_hash", planner_weights.architecture_hash()},
                         {"final_loss", result.log.back().train_loss}};
  return result;
}

DmpTrainResult train_joint(std::span<const PredictionSample> train,
                           const D2CoPlanConfig& planner_config, const DmpConfig& config,
                           const DmpTrainConfig& tc, std::uint64_t planner_seed,
                           const DmpEpochHook& on_epoch) {
  config.validate();
  check_samples(train, config, "train_joint");
  if (tc.epochs < 1) throw std::invalid_argument("train_joint: epochs must be >= 1");
  if (planner_config.grid_size != config.grid_size) {
    throw std::invalid_argument("train_joint: planner and predictor grid sizes differ");
  }
  D2CoPlanNet<float> planner(planner_config, planner_seed);
  DmpNet<float> dmp(config, tc.seed);
  DmpTrainResult result = train_through_planner(train, dmp, planner, true, tc, on_epoch);
  result.dmp = nn::capture(dmp.params(), dmp.architecture(), tc.seed);
  result.dmp.metadata = {{"kind", "dmp"}, {"regime", "joint"}, {"epochs", tc.epochs},
                         {"final_loss", result.log.back().train_loss}};
  result.planner = nn::capture(planner.params(), planner.architecture(), planner_seed);
  result.planner.metadata = {{"kind", "d2coplan"}, {"regime", "joint"}, {"epochs", tc.epochs}};
  return result;
}

std::unique_ptr<DmpNet<float>> load_dmp(const nn::WeightStore& store, const DmpConfig& config) {
  auto net = std::make_unique<DmpNet<float>>(config, store.seed);
  nn::restore(store, net->params(), net->architecture());
  return net;
}

}  // namespace covplan
