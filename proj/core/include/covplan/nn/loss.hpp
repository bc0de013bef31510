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
#ifndef COVPLAN_NN_LOSS_HPP_
#define COVPLAN_NN_LOSS_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "covplan/nn/tensor.hpp"

namespace covplan::nn {

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;  // d loss / d logits
};

// Mean softmax cross-entropy over the rows of [B, C] logits.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw std::invalid_argument("softmax_cross_entropy: logits must be [B, C]");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                " labels for batch " + std::to_string(batch));
  }
  LossResult<T> out{0.0, Tensor<T>(logits.shape())};
  if (batch == 0) return out;
  std::vector<double> p(classes);
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw std::invalid_argument("softmax_cross_entropy: label out of range");
    }
    const T* row = logits.ptr() + b * classes;
    double mx = row[0];
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(row[c]));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      p[c] = std::exp(static_cast<double>(row[c]) - mx);
      z += p[c];
    }
    out.loss += (std::log(z) + mx - row[label]) * inv_b;
    for (std::size_t c = 0; c < classes; ++c) {
      const double g = p[c] / z - (static_cast<int>(c) == label ? 1.0 : 0.0);
      out.grad[b * classes + c] = static_cast<T>(g * inv_b);
    }
  }
  return out;
}

struct ClassWeights {
  double free = 1.0;
  double occupied = 10.0;
};

// Per-cell two-way softmax cross-entropy over [B, 2, H, W] logits against
// binary [B, H, W] labels; each cell is weighted by its label's class
// weight and the result is the plain mean over all B*H*W cells.
template <typename T>
LossResult<T> weighted_pixel_ce(const Tensor<T>& logits, std::span<const float> labels,
                                ClassWeights weights) {
  if (logits.rank() != 4 || logits.dim(1) != 2) {
    throw std::invalid_argument("weighted_pixel_ce: logits must be [B, 2, H, W], got " +
                                shape_string(logits.shape()));
  }
  const std::size_t batch = logits.dim(0), plane = logits.dim(2) * logits.dim(3);
  if (labels.size() != batch * plane) {
    throw std::invalid_argument("weighted_pixel_ce: label count does not match logits");
  }
  LossResult<T> out{0.0, Tensor<T>(logits.shape())};
  const double inv_n = 1.0 / static_cast<double>(batch * plane);
  for (std::size_t b = 0; b < batch; ++b) {
    const T* l0 = logits.ptr() + (b * 2) * plane;
    const T* l1 = l0 + plane;
    T* g0 = out.grad.ptr() + (b * 2) * plane;
    T* g1 = g0 + plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const float label = labels[b * plane + i];
      if (label != 0.0f && label != 1.0f) {
        throw std::invalid_argument("weighted_pixel_ce: labels must be binary");
      }
      const bool occ = label != 0.0f;
      const double w = occ ? weights.occupied : weights.free;
      const double a = l0[i], c = l1[i];
      const double mx = std::max(a, c);
      const double lse = mx + std::log(std::exp(a - mx) + std::exp(c - mx));
      const double p1 = std::exp(c - lse);
      const double p0 = std::exp(a - lse);
      out.loss += w * (lse - (occ ? c : a)) * inv_n;
      g0[i] = static_cast<T>(w * (p0 - (occ ? 0.0 : 1.0)) * inv_n);
      g1[i] = static_cast<T>(w * (p1 - (occ ? 1.0 : 0.0)) * inv_n);
    }
  }
  return out;
}

// Occupied-class probability softmax([l0, l1])[1] for [B, 2, H, W] logits,
// returned as [B, 1, H, W].
template <typename T>
Tensor<T> occupancy_probability(const Tensor<T>& logits) {
  if (logits.rank() != 4 || logits.dim(1) != 2) {
    throw std::invalid_argument("occupancy_probability: logits must be [B, 2, H, W]");
  }
  const std::size_t batch = logits.dim(0), plane = logits.dim(2) * logits.dim(3);
  Tensor<T> p({batch, 1, logits.dim(2), logits.dim(3)});
  for (std::size_t b = 0; b < batch; ++b) {
    const T* l0 = logits.ptr() + b * 2 * plane;
    const T* l1 = l0 + plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const double d = static_cast<double>(l1[i]) - l0[i];
      p[b * plane + i] = static_cast<T>(1.0 / (1.0 + std::exp(-d)));
    }
  }
  return p;
}

// Backward of occupancy_probability given the forward output `prob`.
template <typename T>
Tensor<T> occupancy_probability_backward(const Tensor<T>& prob, const Tensor<T>& grad_prob) {
  const std::size_t batch = prob.dim(0), plane = prob.dim(2) * prob.dim(3);
  Tensor<T> g({batch, 2, prob.dim(2), prob.dim(3)});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      const double p = prob[b * plane + i];
      const double d = static_cast<double>(grad_prob[b * plane + i]) * p * (1.0 - p);
      g[b * 2 * plane + i] = static_cast<T>(-d);
      g[b * 2 * plane + plane + i] = static_cast<T>(d);
    }
  }
  return g;
}

}  // namespace covplan::nn

#endif  // COVPLAN_NN_LOSS_HPP_
