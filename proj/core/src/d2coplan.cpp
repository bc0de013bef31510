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
#include "covplan/d2coplan.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "covplan/nn/optim.hpp"

namespace covplan {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

D2CoPlanConfig D2CoPlanConfig::desk() { return D2CoPlanConfig{}; }

D2CoPlanConfig D2CoPlanConfig::paper() {
  D2CoPlanConfig c;
  c.grid_size = 100;
  c.same_padding = false;
  c.gnn_widths = {512, 128};
  return c;
}

void D2CoPlanConfig::validate() const {
  if (grid_size < 1) throw std::invalid_argument("d2coplan config: grid_size must be positive");
  if (encoder_channels.empty()) throw std::invalid_argument("d2coplan config: no encoder layers");
  if (gnn_widths.empty()) throw std::invalid_argument("d2coplan config: no graph layers");
  for (std::size_t c : encoder_channels) {
    if (c == 0) throw std::invalid_argument("d2coplan config: encoder channels must be positive");
  }
  for (std::size_t w : gnn_widths) {
    if (w == 0) throw std::invalid_argument("d2coplan config: graph widths must be positive");
  }
  if (kernel == 0) throw std::invalid_argument("d2coplan config: kernel must be positive");
  if (actions != kActionCount) {
    throw std::invalid_argument("d2coplan config: action count must equal the action set size");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("d2coplan config: dropout must lie in [0, 1)");
  if (encoder_output_side() == 0) {
    throw std::invalid_argument("d2coplan config: grid too small for the encoder");
  }
}

std::size_t D2CoPlanConfig::encoder_output_side() const {
  std::size_t side = static_cast<std::size_t>(grid_size);
  for (std::size_t i = 0; i < encoder_channels.size(); ++i) {
    if (!same_padding) {
      if (side < kernel) return 0;
      side -= kernel - 1;
    }
    if (side < 2) return 0;
    side /= 2;
  }
  return side;
}

std::size_t D2CoPlanConfig::feature_length() const {
  const std::size_t side = encoder_output_side();
  return side * side * encoder_channels.back();
}

std::string D2CoPlanConfig::architecture() const {
  std::string s = "d2coplan;G=" + std::to_string(grid_size) + ";enc=";
  for (std::size_t c : encoder_channels) s += std::to_string(c) + ",";
  s += ";k=" + std::to_string(kernel) + (same_padding ? ";same" : ";valid");
  s += ";H=" + std::to_string(feature_length()) + ";gnn=";
  for (std::size_t w : gnn_widths) s += std::to_string(w) + ",";
  s += ";K=" + std::to_string(hops) + ";A=" + std::to_string(actions);
  return s;
}

std::size_t argmax_action(std::span<const float> logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

nn::Tensor<float> stack_maps(std::span<const CoverageMap> maps) {
  if (maps.empty()) throw std::invalid_argument("stack_maps: no maps");
  const auto g = static_cast<std::size_t>(maps[0].size);
  nn::Tensor<float> out({maps.size(), 1, g, g});
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (static_cast<std::size_t>(maps[i].size) != g) throw std::invalid_argument("stack_maps: size mismatch");
    std::copy(maps[i].values.begin(), maps[i].values.end(), out.ptr() + i * g * g);
  }
  return out;
}

nn::Tensor<float> stack_recentred(std::span<const CoverageMap> maps, std::span<const Cell> robots) {
  if (robots.size() != maps.size()) throw std::invalid_argument("stack_recentred: robot count mismatch");
  nn::Tensor<float> out = stack_maps(maps);
  const int g = maps[0].size;
  const std::size_t plane = static_cast<std::size_t>(g) * g;
  for (std::size_t i = 0; i < maps.size(); ++i) recentre(maps[i].values.data(), out.ptr() + i * plane, g, robots[i]);
  return out;
}

EvalMetrics evaluate_imitation(D2CoPlanNet<float>& net, std::span<const PlanningSample> samples) {
  EvalMetrics m;
  std::size_t rows = 0;
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (const PlanningSample& s : samples) {
    const nn::Tensor<float> logits = net.forward(s.maps, s.shift, nn::Mode::Eval);
    const auto ce = nn::softmax_cross_entropy(logits, std::span<const int>(s.labels));
    const std::size_t n = s.labels.size();
    loss_sum += ce.loss * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const float> row(logits.ptr() + i * net.config().actions, net.config().actions);
      correct += argmax_action(row) == static_cast<std::size_t>(s.labels[i]) ? 1 : 0;
    }
    rows += n;
  }
  if (rows > 0) {
    m.loss = loss_sum / static_cast<double>(rows);
    m.accuracy = static_cast<double>(correct) / static_cast<double>(rows);
  }
  return m;
}

TrainResult train_imitation(std::span<const PlanningSample> train,
                            std::span<const PlanningSample> validation,
                            const D2CoPlanConfig& config, const TrainConfig& train_config) {
  if (train.empty()) throw std::invalid_argument("train_imitation: empty training set");
  if (train_config.epochs < 1) throw std::invalid_argument("train_imitation: epochs must be >= 1");
  const std::span<const PlanningSample> val = validation.empty() ? train : validation;

  D2CoPlanNet<float> net(config, train_config.seed);
  net.set_input_grad(false);
  const auto params = net.params();
  nn::Adam<float> adam(train_config.learning_rate);
  const auto start = Clock::now();

  TrainResult result;
  {
    const EvalMetrics t0 = evaluate_imitation(net, train);
    const EvalMetrics v0 = evaluate_imitation(net, val);
    result.log.push_back({0, t0.loss, v0.loss, v0.accuracy, seconds_since(start)});
    result.best_epoch = 0;
    result.best_val_loss = v0.loss;
    result.best_val_accuracy = v0.accuracy;
  }
  auto best = nn::snapshot(params);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::max<std::size_t>(train_config.batch_instances, 1);
  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    Rng shuffle(derive_seed(train_config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double loss_sum = 0.0;
    std::size_t rows_seen = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
      const std::size_t b1 = std::min(order.size(), b0 + batch);
      std::size_t batch_rows = 0;
      for (std::size_t b = b0; b < b1; ++b) batch_rows += train[order[b]].labels.size();
      nn::zero_grads(params);
      for (std::size_t b = b0; b < b1; ++b) {
        const PlanningSample& s = train[order[b]];
        const nn::Tensor<float> logits = net.forward(s.maps, s.shift, nn::Mode::Train);
        auto ce = nn::softmax_cross_entropy(logits, std::span<const int>(s.labels));
        const double scale = static_cast<double>(s.labels.size()) / static_cast<double>(batch_rows);
        for (float& g : ce.grad.data()) g = static_cast<float>(g * scale);
        net.backward(ce.grad);
        loss_sum += ce.loss * static_cast<double>(s.labels.size());
      }
      rows_seen += batch_rows;
      adam.step(params);
    }

    const EvalMetrics v = evaluate_imitation(net, val);
    result.log.push_back({epoch, loss_sum / static_cast<double>(rows_seen), v.loss, v.accuracy,
                          seconds_since(start)});
    if (v.loss < result.best_val_loss) {
      result.best_val_loss = v.loss;
      result.best_val_accuracy = v.accuracy;
      result.best_epoch = epoch;
      best = nn::snapshot(params);
    }
    if (train_config.checkpoint_dir) {
      nn::capture(params, net.architecture(), train_config.seed)
          .save(*train_config.checkpoint_dir / ("epoch_" + std::to_string(epoch)));
    }
  }

  nn::load_snapshot(best, params);
  result.weights = nn::capture(params, net.architecture(), train_config.seed);
  result.weights.metadata = {
      {"kind", "d2coplan"},
      {"epochs", train_config.epochs},
      {"best_epoch", result.best_epoch},
      {"best_val_loss", result.best_val_loss},
      {"best_val_accuracy", result.best_val_accuracy},
      {"train_instances", train.size()},
      {"learning_rate", train_config.learning_rate},
  };
  return result;
}

void write_training_log(const std::filesystem::path& path, std::span<const EpochLog> log) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << "epoch,train_loss,val_loss,val_accuracy,wall_clock_s\n";
  for (const EpochLog& e : log) {
    out << e.epoch << "," << e.train_loss << "," << e.val_loss << "," << e.val_accuracy << ","
        << e.wall_clock << "\n";
  }
  if (!out) throw std::runtime_error("failed writing training log " + path.string());
}

std::unique_ptr<D2CoPlanNet<float>> load_d2coplan(const nn::WeightStore& store,
                                                  const D2CoPlanConfig& config) {
  auto net = std::make_unique<D2CoPlanNet<float>>(config, store.seed);
  nn::restore(store, net->params(), net->architecture());
  return net;
}

D2CoPlanPlan d2coplan_plan(D2CoPlanNet<float>& net, std::span<const CoverageMap> local_maps,
                           const CommGraph& graph) {
  const std::size_t n = local_maps.size();
  if (graph.size() != n) {
    throw std::invalid_argument("d2coplan: graph has " + std::to_string(graph.size()) +
                                " nodes for " + std::to_string(n) + " maps");
  }
  const auto start = Clock::now();
  const D2CoPlanConfig& cfg = net.config();
  const auto g = static_cast<std::size_t>(cfg.grid_size);
  // The normalized shift is treated as given to every robot alongside its
  // neighbour list.
  const GraphShift shift = normalize(graph);

  D2CoPlanPlan out;
  out.result.assignment = Assignment(n);
  out.result.robot_latency.assign(n, 0.0);
  out.logits.assign(n, std::vector<float>(cfg.actions));

  // Stage 1: local encoding; the rows of `features` are the transmitted messages.
  const std::size_t h = cfg.feature_length();
  nn::Tensor<float> features({n, h});
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    if (static_cast<std::size_t>(local_maps[i].size) != g) {
      throw std::invalid_argument("d2coplan: local map size does not match the network grid");
    }
    nn::Tensor<float> one({1, 1, g, g});
    recentre(local_maps[i].values.data(), one.ptr(), cfg.grid_size, graph.positions[i]);
    const nn::Tensor<float> f = net.encode(one, nn::Mode::Eval);
    std::copy(f.data().begin(), f.data().end(), features.ptr() + i * h);
    out.result.robot_latency[i] += seconds_since(t0);
  }

  // Stage 2: one synchronous exchange round per shift power per graph layer.
  nn::Tensor<float> current = features;
  for (std::size_t l = 0; l < net.graph_layer_count(); ++l) {
    nn::GraphConv<float>& layer = net.graph_layer(l);
    const std::size_t in = layer.in_features(), w = layer.out_features();
    std::vector<nn::Tensor<float>> shifted;
    shifted.push_back(current);
    for (std::size_t k = 1; k <= layer.hops(); ++k) {
      nn::Tensor<float> z({n, in});
      for (std::size_t i = 0; i < n; ++i) {
        const auto t0 = Clock::now();
        nn::GraphConv<float>::shift_row(shift.shift, i, shifted.back(), z.ptr() + i * in);
        out.result.robot_latency[i] += seconds_since(t0);
      }
      shifted.push_back(std::move(z));
    }
    nn::Tensor<float> next({n, w});
    std::vector<const float*> rows(layer.hops() + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto t0 = Clock::now();
      for (std::size_t k = 0; k <= layer.hops(); ++k) rows[k] = shifted[k].ptr() + i * in;
      float* y = next.ptr() + i * w;
      layer.output_row(rows, y);
      for (std::size_t c = 0; c < w; ++c) y[c] = y[c] > 0.0f ? y[c] : 0.0f;
      out.result.robot_latency[i] += seconds_since(t0);
    }
    current = std::move(next);
  }

  // Stage 3: local action selection.
  const std::size_t w = current.dim(1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    nn::Tensor<float> row({1, w}, std::vector<float>(current.ptr() + i * w, current.ptr() + (i + 1) * w));
    const nn::Tensor<float> logits = net.select(row);
    std::copy(logits.data().begin(), logits.data().end(), out.logits[i].begin());
    out.result.assignment.assign(i, kActions[argmax_action(out.logits[i])]);
    out.result.robot_latency[i] += seconds_since(t0);
  }
  out.result.total_latency = seconds_since(start);
  return out;
}

PlanResult D2CoPlanPlanner::plan(const PlannerInput& input) {
  if (!net_) throw std::runtime_error("d2coplan: no trained weights loaded");
  input.validate();
  return d2coplan_plan(*net_, input.local_maps, input.graph).result;
}

}  // namespace covplan
