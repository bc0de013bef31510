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
#include "covplan/nn/weights.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "covplan/checksum.hpp"

namespace covplan::nn {
namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

std::string architecture_hash_of(const std::string& architecture) {
  return hex32(crc32(architecture));
}

std::string WeightStore::architecture_hash() const { return architecture_hash_of(architecture); }

const NamedArray* WeightStore::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void WeightStore::save(const std::filesystem::path& stem) const {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  std::vector<std::byte> blob;
  nlohmann::json entries = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : tensors) {
    for (float v : t.values) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) blob.push_back(static_cast<std::byte>((bits >> (8 * b)) & 0xffu));
    }
    entries.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"count", t.values.size()}});
    offset += t.values.size();
  }
  {
    std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary | std::ios::trunc);
    bin.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    if (!bin) throw std::runtime_error("weights: failed writing " + with_suffix(stem, ".bin").string());
  }
  nlohmann::json manifest = {
      {"format", kWeightsFormat},
      {"version", kWeightsVersion},
      {"architecture", architecture},
      {"architecture_hash", architecture_hash()},
      {"seed", seed},
      {"metadata", metadata},
      {"tensors", entries},
      {"checksum_crc32", hex32(crc32(blob))},
  };
  std::ofstream js(with_suffix(stem, ".json"), std::ios::trunc);
  js << manifest.dump(2) << "\n";
  if (!js) throw std::runtime_error("weights: failed writing " + with_suffix(stem, ".json").string());
}

WeightStore WeightStore::load(const std::filesystem::path& stem) {
  const auto json_path = with_suffix(stem, ".json");
  const auto bin_path = with_suffix(stem, ".bin");
  std::ifstream js(json_path);
  if (!js) throw std::runtime_error("weights: cannot open " + json_path.string());
  const nlohmann::json manifest = nlohmann::json::parse(js);
  if (manifest.value("format", "") != kWeightsFormat) {
    throw std::runtime_error("weights: " + json_path.string() + " is not a weight manifest");
  }
  if (manifest.value("version", 0) != kWeightsVersion) {
    throw std::runtime_error("weights: unsupported version in " + json_path.string());
  }
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("weights: cannot open " + bin_path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  const std::span<const std::byte> bytes(reinterpret_cast<const std::byte*>(raw.data()), raw.size());
  if (hex32(crc32(bytes)) != manifest.at("checksum_crc32").get<std::string>()) {
    throw std::runtime_error("weights: checksum mismatch for " + bin_path.string());
  }

  WeightStore store;
  store.architecture = manifest.at("architecture").get<std::string>();
  if (manifest.at("architecture_hash").get<std::string>() != store.architecture_hash()) {
    throw std::runtime_error("weights: manifest architecture hash is inconsistent");
  }
  store.seed = manifest.at("seed").get<std::uint64_t>();
  store.metadata = manifest.at("metadata");
  for (const auto& e : manifest.at("tensors")) {
    NamedArray a;
    a.name = e.at("name").get<std::string>();
    a.shape = e.at("shape").get<Shape>();
    const auto offset = e.at("offset").get<std::size_t>();
    const auto count = e.at("count").get<std::size_t>();
    if (count != shape_size(a.shape) || (offset + count) * 4 > raw.size()) {
      throw std::runtime_error("weights: tensor " + a.name + " does not fit the blob");
    }
    a.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[(offset + i) * 4 + b])) << (8 * b);
      }
      a.values[i] = std::bit_cast<float>(bits);
    }
    store.tensors.push_back(std::move(a));
  }
  return store;
}

}  // namespace covplan::nn
