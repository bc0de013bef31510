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
#ifndef COVPLAN_NN_WEIGHTS_HPP_
#define COVPLAN_NN_WEIGHTS_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covplan/nn/tensor.hpp"

namespace covplan::nn {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
  bool operator==(const NamedArray&) const = default;
};

// Ordered named parameters plus a manifest. On disk: <stem>.bin holds the
// tensors as little-endian float32 in manifest order; <stem>.json holds
// names, shapes, offsets, the architecture string and hash, the seed, free
// form metadata and the CRC-32 of the blob.
struct WeightStore {
  std::string architecture;
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<NamedArray> tensors;

  std::string architecture_hash() const;
  const NamedArray* find(const std::string& name) const;

  void save(const std::filesystem::path& stem) const;
  // Throws std::runtime_error on missing files, a bad checksum, or a
  // manifest/blob size disagreement.
  static WeightStore load(const std::filesystem::path& stem);

  bool operator==(const WeightStore& other) const {
    return architecture == other.architecture && seed == other.seed && tensors == other.tensors;
  }
};

inline constexpr const char* kWeightsFormat = "covplan-weights";
inline constexpr int kWeightsVersion = 1;

std::string architecture_hash_of(const std::string& architecture);

template <typename T>
WeightStore capture(const std::vector<NamedParam<T>>& params, const std::string& architecture,
                    std::uint64_t seed) {
  WeightStore store;
  store.architecture = architecture;
  store.seed = seed;
  for (const auto& p : params) {
    NamedArray a;
    a.name = p.name;
    a.shape = p.tensor->shape();
    a.values.assign(p.tensor->data().begin(), p.tensor->data().end());
    store.tensors.push_back(std::move(a));
  }
  return store;
}

// Copies stored values into `params`. Fails loudly when the stored
// architecture hash differs from the hash of `architecture` or when any
// name or shape disagrees.
template <typename T>
void restore(const WeightStore& store, const std::vector<NamedParam<T>>& params,
             const std::string& architecture) {
  const std::string expected = architecture_hash_of(architecture);
  if (store.architecture_hash() != expected) {
    throw std::runtime_error("weights: architecture hash mismatch (file " +
                             store.architecture_hash() + ", network " + expected + ")");
  }
  if (store.tensors.size() != params.size()) {
    throw std::runtime_error("weights: tensor count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const NamedArray& a = store.tensors[i];
    if (a.name != params[i].name || a.shape != params[i].tensor->shape()) {
      throw std::runtime_error("weights: tensor " + std::to_string(i) + " is " + a.name +
                               shape_string(a.shape) + ", network expects " + params[i].name +
                               shape_string(params[i].tensor->shape()));
    }
    auto dst = params[i].tensor->data();
    for (std::size_t j = 0; j < a.values.size(); ++j) dst[j] = static_cast<T>(a.values[j]);
  }
}

// In-memory parameter snapshot for best-checkpoint tracking.
template <typename T>
std::vector<std::vector<T>> snapshot(const std::vector<NamedParam<T>>& params) {
  std::vector<std::vector<T>> out;
  for (const auto& p : params) out.emplace_back(p.tensor->data().begin(), p.tensor->data().end());
  return out;
}

template <typename T>
void load_snapshot(const std::vector<std::vector<T>>& snap, const std::vector<NamedParam<T>>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(snap[i].begin(), snap[i].end(), params[i].tensor->data().begin());
  }
}

}  // namespace covplan::nn

#endif  // COVPLAN_NN_WEIGHTS_HPP_
