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
#ifndef COVPLAN_D2COPLAN_HPP_
#define COVPLAN_D2COPLAN_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covplan/comms.hpp"
#include "covplan/matrix.hpp"
#include "covplan/nn/layers.hpp"
#include "covplan/nn/loss.hpp"
#include "covplan/nn/tensor.hpp"
#include "covplan/nn/weights.hpp"
#include "covplan/planners.hpp"

namespace covplan {

struct D2CoPlanConfig {
  int grid_size = 32;
  std::vector<std::size_t> encoder_channels = {4, 8, 16};
  std::size_t kernel = 3;
  // Same-padded convolutions keep G before each 2x2 pool; unpadded ones
  // shrink by kernel-1 (100 -> 98 -> 49 -> 47 -> 23 -> 21 -> 10 gives 1600).
  bool same_padding = true;
  std::vector<std::size_t> gnn_widths = {64, 32};
  std::size_t hops = 1;
  std::size_t actions = kActionCount;
  double dropout = 0.2;

  static D2CoPlanConfig desk();
  static D2CoPlanConfig paper();

  void validate() const;
  // Flattened encoder output length H, i.e. the per-robot message size.
  std::size_t feature_length() const;
  std::size_t encoder_output_side() const;
  std::string architecture() const;
};

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_instances = 8;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  // Optional per-epoch checkpoint directory (epoch_<n>.bin/json).
  std::optional<std::filesystem::path> checkpoint_dir;
};

// Network stages are kept separate so that a robot can run encode -> one
// exchange per graph layer -> select on its own row.
template <typename T>
class D2CoPlanNet {
 public:
  D2CoPlanNet(const D2CoPlanConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    const std::size_t k = config.kernel;
    const std::size_t pad = config.same_padding ? k / 2 : 0;
    std::size_t prev = 1;
    std::uint64_t stream = 0;
    for (std::size_t c : config.encoder_channels) {
      encoder_.template add<nn::Conv2d<T>>(prev, c, k, 1, pad);
      encoder_.template add<nn::ReLU<T>>();
      encoder_.template add<nn::MaxPool2d<T>>(2, 2);
      encoder_.template add<nn::Dropout<T>>(config.dropout, derive_seed(seed, 100 + stream++));
      prev = c;
    }
    encoder_.template add<nn::Flatten<T>>();
    std::size_t width = config.feature_length();
    for (std::size_t w : config.gnn_widths) {
      graph_layers_.push_back(std::make_unique<nn::GraphConv<T>>(width, w, config.hops));
      graph_relus_.push_back(std::make_unique<nn::ReLU<T>>());
      width = w;
    }
    graph_dropout_ = std::make_unique<nn::Dropout<T>>(config.dropout, derive_seed(seed, 200));
    selector_ = std::make_unique<nn::Dense<T>>(width, config.actions);

    Rng rng(derive_seed(seed, 1));
    encoder_.init(rng);
    for (auto& g : graph_layers_) g->init(rng);
    selector_->init(rng);
  }

  const D2CoPlanConfig& config() const { return config_; }
  std::string architecture() const { return config_.architecture(); }

  // [N, 1, G, G] -> [N, H]
  nn::Tensor<T> encode(const nn::Tensor<T>& maps, nn::Mode mode) {
    nn::detail::require_rank("encode_map", maps.shape(), 4);
    nn::detail::require_dim("encode_map", "channel", maps.dim(1), 1);
    nn::detail::require_dim("encode_map", "height", maps.dim(2), static_cast<std::size_t>(config_.grid_size));
    nn::detail::require_dim("encode_map", "width", maps.dim(3), static_cast<std::size_t>(config_.grid_size));
    return encoder_.forward(maps, mode);
  }

  // [N, H] -> [N, last GNN width]
  nn::Tensor<T> aggregate(const nn::Tensor<T>& features, const Matrix& shift, nn::Mode mode) {
    nn::Tensor<T> h = features;
    for (std::size_t l = 0; l < graph_layers_.size(); ++l) {
      h = graph_layers_[l]->forward(h, shift);
      h = graph_relus_[l]->forward(h, mode);
    }
    return graph_dropout_->forward(h, mode);
  }

  // [N, width] -> [N, |A|]
  nn::Tensor<T> select(const nn::Tensor<T>& aggregated) {
    return selector_->forward(aggregated, nn::Mode::Eval);
  }

  nn::Tensor<T> forward(const nn::Tensor<T>& maps, const Matrix& shift, nn::Mode mode) {
    return select(aggregate(encode(maps, mode), shift, mode));
  }

  // Returns d loss / d maps after accumulating parameter gradients.
  nn::Tensor<T> backward(const nn::Tensor<T>& grad_logits) {
    nn::Tensor<T> g = selector_->backward(grad_logits);
    g = graph_dropout_->backward(g);
    for (std::size_t l = graph_layers_.size(); l-- > 0;) {
      g = graph_relus_[l]->backward(g);
      g = graph_layers_[l]->backward(g);
    }
    return encoder_.backward(g);
  }

  std::vector<nn::NamedParam<T>> params() {
    std::vector<nn::NamedParam<T>> out = encoder_.params("encoder");
    for (std::size_t l = 0; l < graph_layers_.size(); ++l) {
      for (auto& p : graph_layers_[l]->params("gnn." + std::to_string(l))) out.push_back(p);
    }
    for (auto& p : selector_->params("selector")) out.push_back(p);
    return out;
  }

  std::uint64_t signature() const {
    nn::Signature sig;
    encoder_.signature(sig);
    for (const auto& r : graph_relus_) r->signature(sig);
    return sig.value();
  }

  // The first convolution sees data, not activations; its input gradient is
  // only needed when a map predictor is chained in front.
  void set_input_grad(bool enabled) {
    dynamic_cast<nn::Conv2d<T>&>(encoder_.layer(0)).set_input_grad(enabled);
  }

  nn::GraphConv<T>& graph_layer(std::size_t l) { return *graph_layers_.at(l); }
  std::size_t graph_layer_count() const { return graph_layers_.size(); }
  nn::Dense<T>& selector() { return *selector_; }

 private:
  D2CoPlanConfig config_;
  nn::Sequential<T> encoder_;
  std::vector<std::unique_ptr<nn::GraphConv<T>>> graph_layers_;
  std::vector<std::unique_ptr<nn::ReLU<T>>> graph_relus_;
  std::unique_ptr<nn::Dropout<T>> graph_dropout_;
  std::unique_ptr<nn::Dense<T>> selector_;
};

// Argmax with ties resolved to the earliest action in the fixed order.
std::size_t argmax_action(std::span<const float> logits);

// [N, 1, G, G] stack of local maps in robot order.
nn::Tensor<float> stack_maps(std::span<const CoverageMap> maps);

// The planner reads each local map in its robot's frame: a translation that
// puts the robot on cell (G/2, G/2), zero where the source falls off the grid.
template <typename T>
void recentre(const T* src, T* dst, int g, Cell robot) {
  const int dx = robot.x - g / 2;
  const int dy = robot.y - g / 2;
  for (int y = 0; y < g; ++y) {
    const int sy = y + dy;
    for (int x = 0; x < g; ++x) {
      const int sx = x + dx;
      const bool inside = sx >= 0 && sx < g && sy >= 0 && sy < g;
      dst[y * g + x] = inside ? src[sy * g + sx] : T(0);
    }
  }
}

// Adjoint of recentre: routes a gradient on the robot frame back to the grid.
template <typename T>
void recentre_backward(const T* grad_dst, T* grad_src, int g, Cell robot) {
  const int dx = robot.x - g / 2;
  const int dy = robot.y - g / 2;
  std::fill(grad_src, grad_src + static_cast<std::size_t>(g) * g, T(0));
  for (int y = 0; y < g; ++y) {
    const int sy = y + dy;
    if (sy < 0 || sy >= g) continue;
    for (int x = 0; x < g; ++x) {
      const int sx = x + dx;
      if (sx >= 0 && sx < g) grad_src[sy * g + sx] = grad_dst[y * g + x];
    }
  }
}

// Recentred [N, 1, G, G] stack; robots[i] is the position of map i's owner.
nn::Tensor<float> stack_recentred(std::span<const CoverageMap> maps, std::span<const Cell> robots);

// One labelled planning instance: local maps, the normalized graph shift and
// the Expert action per robot.
struct PlanningSample {
  nn::Tensor<float> maps;  // [N, 1, G, G], recentred
  Matrix shift;            // [N, N]
  std::vector<int> labels;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double wall_clock = 0.0;
};

struct TrainResult {
  nn::WeightStore weights;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double best_val_accuracy = 0.0;
};

struct EvalMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalMetrics evaluate_imitation(D2CoPlanNet<float>& net, std::span<const PlanningSample> samples);

// Minimizes mean per-robot softmax cross-entropy against Expert labels with
// Adam; evaluates after every epoch and returns the minimum-validation-loss
// weights. Epoch 0 in the log is the untrained network. Throws
// std::invalid_argument on an empty training set.
TrainResult train_imitation(std::span<const PlanningSample> train,
                            std::span<const PlanningSample> validation,
                            const D2CoPlanConfig& config, const TrainConfig& train_config);

void write_training_log(const std::filesystem::path& path, std::span<const EpochLog> log);

// Float network from stored weights; throws on architecture mismatch.
std::unique_ptr<D2CoPlanNet<float>> load_d2coplan(const nn::WeightStore& store,
                                                  const D2CoPlanConfig& config);

struct D2CoPlanPlan {
  PlanResult result;
  std::vector<std::vector<float>> logits;  // per robot
};

// Decentralized inference: every robot encodes its own map, takes part in one
// synchronous 1-hop exchange per graph layer and selects from its own row.
// Per-robot compute time is recorded in result.robot_latency.
D2CoPlanPlan d2coplan_plan(D2CoPlanNet<float>& net, std::span<const CoverageMap> local_maps,
                           const CommGraph& graph);

class D2CoPlanPlanner final : public Planner {
 public:
  explicit D2CoPlanPlanner(std::shared_ptr<D2CoPlanNet<float>> net) : net_(std::move(net)) {}
  std::string_view name() const override { return "d2coplan"; }
  bool decentralized() const override { return true; }
  PlanResult plan(const PlannerInput& input) override;
  D2CoPlanNet<float>& network() { return *net_; }

 private:
  std::shared_ptr<D2CoPlanNet<float>> net_;
};

}  // namespace covplan

#endif  // COVPLAN_D2COPLAN_HPP_
