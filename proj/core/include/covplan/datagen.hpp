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
#ifndef COVPLAN_DATAGEN_HPP_
#define COVPLAN_DATAGEN_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "covplan/comms.hpp"
#include "covplan/d2coplan.hpp"
#include "covplan/dmp.hpp"
#include "covplan/planners.hpp"
#include "covplan/world.hpp"

namespace covplan {

inline constexpr std::string_view kDatasetFormat = "covplan-dataset";
inline constexpr int kDatasetVersion = 1;
// Three history steps followed by the labelled step.
inline constexpr std::size_t kEpisodeSteps = 4;
inline constexpr std::size_t kLabelStep = kEpisodeSteps - 1;

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;

  void validate() const;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// Train and validation take floor(fraction * count); test takes the rest.
SplitSizes split_sizes(std::size_t count, const SplitFractions& fractions);

struct ScenarioSpec {
  WorldParams params;
  std::size_t robots = 6;
  std::uint64_t seed = 1;
};

// One scenario followed for kEpisodeSteps steps with stationary robots. The
// Expert label is computed on the ground truth at the last step.
struct EpisodeRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;  // derive_seed(dataset seed, index)
  WorldParams params;
  std::uint64_t density_seed = 0;
  int density_retries = 0;
  RobotState robots;
  std::vector<TargetSet> targets;  // one per step, oldest first
  std::vector<Window> windows;     // per-robot reachable window
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<int> labels;         // Expert action index per robot
  int expert_coverage = 0;

  // Dense arrays held in the binary blob.
  std::vector<CoverageMap> count_maps;  // global target counts per step
  CoverageMap next_occupancy;           // global occupancy at the label step

  WorldState labeled_world() const;
  CommGraph graph() const;
  CoverageMap local_map(std::size_t robot, std::size_t step) const;
  std::vector<CoverageMap> local_maps(std::size_t step) const;
  PlannerInput planner_input() const;

  bool operator==(const EpisodeRecord&) const = default;
};

EpisodeRecord generate_episode(const ScenarioSpec& spec, std::size_t index);

// Recomputes expert_plan from the stored scenario and compares.
bool label_consistent(const EpisodeRecord& record);

struct DatasetManifest {
  std::string format = std::string(kDatasetFormat);
  int version = kDatasetVersion;
  std::size_t count = 0;
  ScenarioSpec spec;
  SplitFractions fractions;
  SplitSizes splits;
  std::vector<std::string> record_checksums;  // crc32 hex of json then bin
  std::string checksum;                       // crc32 over the record checksums
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<EpisodeRecord> records;

  std::span<const EpisodeRecord> train() const;
  std::span<const EpisodeRecord> validation() const;
  std::span<const EpisodeRecord> test() const;
};

// Writes rec_NNNNNN.json/.bin per record and manifest.json last. A directory
// without a manifest is incomplete. Records are a pure function of
// (spec, index), so output bytes do not depend on `jobs`.
DatasetManifest generate_dataset(const std::filesystem::path& dir, std::size_t count,
                                 const ScenarioSpec& spec, const SplitFractions& fractions = {},
                                 std::size_t jobs = 0);

// Throws std::runtime_error if the manifest is missing, the format or version
// differs, or a record checksum does not match.
Dataset load_dataset(const std::filesystem::path& dir);

void save_record(const std::filesystem::path& dir, const EpisodeRecord& record);
EpisodeRecord load_record(const std::filesystem::path& dir, std::size_t index);
std::string record_stem(std::size_t index);

// Ground-truth planner training sample at the label step.
PlanningSample planning_sample(const EpisodeRecord& record);
std::vector<PlanningSample> planning_samples(std::span<const EpisodeRecord> records);

// Predictor sample. With `local_history` the history channels are masked to
// each robot's window; otherwise every robot sees the global history.
PredictionSample prediction_sample(const EpisodeRecord& record, bool local_history = true);
std::vector<PredictionSample> prediction_samples(std::span<const EpisodeRecord> records,
                                                 bool local_history = true);

}  // namespace covplan

#endif  // COVPLAN_DATAGEN_HPP_
