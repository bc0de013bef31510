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
#ifndef COVPLAN_DMP_HPP_
#define COVPLAN_DMP_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "covplan/d2coplan.hpp"
#include "covplan/matrix.hpp"
#include "covplan/nn/layers.hpp"
#include "covplan/nn/loss.hpp"
#include "covplan/nn/tensor.hpp"
#include "covplan/nn/weights.hpp"

namespace covplan {

struct DmpConfig {
  int grid_size = 32;
  std::size_t history = 3;
  std::vector<std::size_t> channels = {8, 16, 4, 2};
  std::size_t kernel = 3;
  nn::ClassWeights class_weights{1.0, 10.0};

  void validate() const;
  std::string architecture() const;
};

struct DmpTrainConfig {
  int epochs = 2000;
  std::size_t batch_instances = 4;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

enum class DmpRegime { Joint, Separate, FrozenDownstream };

std::string_view regime_name(DmpRegime regime);
DmpRegime parse_regime(std::string_view name);

// Same-resolution CNN: 'same' padded stride-1 convolutions with ReLU between
// layers; the last layer emits [free, occupied] logits per cell.
template <typename T>
class DmpNet {
 public:
  DmpNet(const DmpConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    std::size_t prev = config.history;
    for (std::size_t l = 0; l < config.channels.size(); ++l) {
      layers_.template add<nn::Conv2d<T>>(prev, config.channels[l], config.kernel, 1, config.kernel / 2);
      if (l + 1 < config.channels.size()) layers_.template add<nn::ReLU<T>>();
      prev = config.channels[l];
    }
    set_input_grad(false);
    Rng rng(derive_seed(seed, 7));
    layers_.init(rng);
  }

  const DmpConfig& config() const { return config_; }
  std::string architecture() const { return config_.architecture(); }

  // [B, history, G, G] -> [B, 2, G, G]
  nn::Tensor<T> forward(const nn::Tensor<T>& histories, nn::Mode mode) {
    nn::detail::require_rank("predict_map", histories.shape(), 4);
    nn::detail::require_dim("predict_map", "history channel", histories.dim(1), config_.history);
    return layers_.forward(histories, mode);
  }

  nn::Tensor<T> backward(const nn::Tensor<T>& grad_logits) { return layers_.backward(grad_logits); }

  std::vector<nn::NamedParam<T>> params() { return layers_.params("dmp"); }

  std::uint64_t signature() const {
    nn::Signature sig;
    layers_.signature(sig);
    return sig.value();
  }

  void set_input_grad(bool enabled) {
    dynamic_cast<nn::Conv2d<T>&>(layers_.layer(0)).set_input_grad(enabled);
  }

 private:
  DmpConfig config_;
  nn::Sequential<T> layers_;
};

struct OccupancyPrediction {
  nn::Tensor<float> logits;       // [B, 2, G, G]
  nn::Tensor<float> probability;  // [B, 1, G, G], softmax occupied channel
};

OccupancyPrediction predict_map(DmpNet<float>& net, const nn::Tensor<float>& histories);

// One training/evaluation instance for the predictor: per-robot masked
// histories (oldest first), the next-step occupancy masked to each robot's
// window, the masks themselves, and the planning labels.
struct PredictionSample {
  nn::Tensor<float> histories;        // [N, history, G, G]
  std::vector<float> next_occupancy;  // [N * G * G], binary
  nn::Tensor<float> window_masks;     // [N, 1, G, G], 1 inside the robot window
  std::vector<Cell> robots;          // owner of each row, for the planner frame
  Matrix shift;
  std::vector<int> labels;
};

// DMP -> occupied probability -> window mask -> robot frame -> D2CoPlan.
// Forward caches the intermediate probability so backward can route
// d loss / d logits all the way to the predictor parameters.
template <typename T>
class PredictPlanChain {
 public:
  PredictPlanChain(DmpNet<T>& dmp, D2CoPlanNet<T>& planner) : dmp_(dmp), planner_(planner) {
    planner_.set_input_grad(true);
  }

  nn::Tensor<T> forward(const nn::Tensor<T>& histories, const nn::Tensor<T>& masks, std::span<const Cell> robots,
                        const Matrix& shift, nn::Mode dmp_mode, nn::Mode planner_mode) {
    prob_ = nn::occupancy_probability(dmp_.forward(histories, dmp_mode));
    if (robots.size() != prob_.shape()[0]) throw std::invalid_argument("PredictPlanChain: robot count mismatch");
    mask_ = masks;
    robots_.assign(robots.begin(), robots.end());
    const int g = static_cast<int>(prob_.shape()[3]);
    const std::size_t plane = static_cast<std::size_t>(g) * g;
    nn::Tensor<T> masked = prob_;
    for (std::size_t i = 0; i < masked.size(); ++i) masked[i] *= masks[i];
    nn::Tensor<T> maps(masked.shape());
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      recentre(masked.ptr() + i * plane, maps.ptr() + i * plane, g, robots_[i]);
    }
    return planner_.forward(maps, shift, planner_mode);
  }

  void backward(const nn::Tensor<T>& grad_logits) {
    const nn::Tensor<T> gr = planner_.backward(grad_logits);
    const int g = static_cast<int>(gr.shape()[3]);
    const std::size_t plane = static_cast<std::size_t>(g) * g;
    nn::Tensor<T> g_masked(gr.shape());
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      recentre_backward(gr.ptr() + i * plane, g_masked.ptr() + i * plane, g, robots_[i]);
    }
    for (std::size_t i = 0; i < g_masked.size(); ++i) g_masked[i] *= mask_[i];
    dmp_.backward(nn::occupancy_probability_backward(prob_, g_masked));
  }

  uint64_t signature() const {
    nn::Signature sig;
    sig.add(dmp_.signature());
    sig.add(planner_.signature());
    return sig.value();
  }

 private:
  DmpNet<T>& dmp_;
  D2CoPlanNet<T>& planner_;
  nn::Tensor<T> prob_;
  nn::Tensor<T> mask_;
  std::vector<Cell> robots_;
};

// Masked occupied probabilities as planner-ready local maps.
std::vector<CoverageMap> predicted_local_maps(DmpNet<float>& net, const PredictionSample& sample,
                                              std::span<const Window> windows);

struct DmpTrainResult {
  nn::WeightStore dmp;
  nn::WeightStore planner;  // filled by the joint regime only
  std::vector<EpochLog> log;
};

// Called after every epoch (and once before training as epoch 0). The planner
// pointer is null for the standalone regime.
using DmpEpochHook = std::function<void(int epoch, DmpNet<float>& dmp, D2CoPlanNet<float>* planner)>;

// Weighted pixel cross-entropy against the next-step occupancy.
DmpTrainResult train_dmp_standalone(std::span<const PredictionSample> train, const DmpConfig& config,
                                    const DmpTrainConfig& train_config,
                                    const DmpEpochHook& on_epoch = {});

// Action cross-entropy through a frozen pre-trained planner. Verifies after
// training that the planner parameters are bit-identical to `planner_weights`
// and throws std::logic_error otherwise.
DmpTrainResult train_dmp_downstream(std::span<const PredictionSample> train,
                                    const nn::WeightStore& planner_weights,
                                    const D2CoPlanConfig& planner_config, const DmpConfig& config,
                                    const DmpTrainConfig& train_config,
                                    const DmpEpochHook& on_epoch = {});

// Predictor and planner optimised together from scratch on the action loss.
DmpTrainResult train_joint(std::span<const PredictionSample> train,
                           const D2CoPlanConfig& planner_config, const DmpConfig& config,
                           const DmpTrainConfig& train_config, std::uint64_t planner_seed,
                           const DmpEpochHook& on_epoch = {});

double dmp_pixel_loss(DmpNet<float>& net, std::span<const PredictionSample> samples);

std::unique_ptr<DmpNet<float>> load_dmp(const nn::WeightStore& store, const DmpConfig& config);

}  // namespace covplan

#endif  // COVPLAN_DMP_HPP_
