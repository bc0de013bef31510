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
#include "covplan/datagen.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "covplan/checksum.hpp"
#include "covplan/objective.hpp"
#include "covplan/parallel.hpp"
#include "covplan/rng.hpp"
#include "covplan/scenario_io.hpp"

namespace covplan {
namespace {

namespace fs = std::filesystem;
constexpr char kBlobMagic[4] = {'C', 'P', 'B', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw std::runtime_error("blob: truncated");
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  pos += 4;
  return v;
}

// Shape header (rank, dims) followed by little-endian float32 values.
void put_array(std::string& out, const std::vector<std::uint32_t>& shape, const std::vector<float>& values) {
  put_u32(out, static_cast<std::uint32_t>(shape.size()));
  for (std::uint32_t d : shape) put_u32(out, d);
  for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::vector<float> get_array(const std::string& in, std::size_t& pos, const std::vector<std::uint32_t>& want) {
  const std::uint32_t rank = get_u32(in, pos);
  std::vector<std::uint32_t> shape(rank);
  std::size_t n = 1;
  for (auto& d : shape) {
    d = get_u32(in, pos);
    n *= d;
  }
  if (shape != want) throw std::runtime_error("blob: unexpected array shape");
  std::vector<float> v(n);
  for (float& x : v) x = std::bit_cast<float>(get_u32(in, pos));
  return v;
}

std::string encode_blob(const EpisodeRecord& r) {
  const auto g = static_cast<std::uint32_t>(r.params.grid_size);
  std::string out(kBlobMagic, 4);
  put_u32(out, 2);
  std::vector<float> counts;
  for (const CoverageMap& m : r.count_maps) counts.insert(counts.end(), m.values.begin(), m.values.end());
  put_array(out, {static_cast<std::uint32_t>(r.count_maps.size()), g, g}, counts);
  put_array(out, {g, g}, r.next_occupancy.values);
  return out;
}

void decode_blob(const std::string& in, EpisodeRecord& r) {
  if (in.size() < 8 || std::memcmp(in.data(), kBlobMagic, 4) != 0) throw std::runtime_error("blob: bad magic");
  std::size_t pos = 4;
  if (get_u32(in, pos) != 2) throw std::runtime_error("blob: unexpected array count");
  const auto g = static_cast<std::uint32_t>(r.params.grid_size);
  const std::size_t plane = static_cast<std::size_t>(g) * g;
  const auto counts = get_array(in, pos, {static_cast<std::uint32_t>(kEpisodeSteps), g, g});
  r.count_maps.assign(kEpisodeSteps, CoverageMap(r.params.grid_size));
  for (std::size_t s = 0; s < kEpisodeSteps; ++s) {
    std::copy(counts.begin() + s * plane, counts.begin() + (s + 1) * plane, r.count_maps[s].values.begin());
  }
  r.next_occupancy = CoverageMap(r.params.grid_size);
  r.next_occupancy.values = get_array(in, pos, {g, g});
  if (pos != in.size()) throw std::runtime_error("blob: trailing bytes");
}

nlohmann::json record_json(const EpisodeRecord& r) {
  nlohmann::json labels = nlohmann::json::array();
  for (int a : r.labels) labels.push_back(action_name(kActions.at(static_cast<std::size_t>(a))));
  return {{"format", kDatasetFormat},
          {"version", kDatasetVersion},
          {"index", r.index},
          {"seed", r.seed},
          {"params", r.params},
          {"density_seed", r.density_seed},
          {"density_retries", r.density_retries},
          {"robots", r.robots},
          {"targets", r.targets},
          {"windows", r.windows},
          {"neighbors", r.neighbors},
          {"labels", labels},
          {"label_step", kLabelStep},
          {"expert_coverage", r.expert_coverage},
          {"blob", {{"file", record_stem(r.index) + ".bin"},
                    {"arrays", {"count_maps[steps,G,G]", "next_occupancy[G,G]"}}}}};
}

EpisodeRecord record_from_json(const nlohmann::json& j) {
  EpisodeRecord r;
  r.index = j.at("index").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.params = j.at("params").get<WorldParams>();
  r.density_seed = j.at("density_seed").get<std::uint64_t>();
  r.density_retries = j.at("density_retries").get<int>();
  r.robots = j.at("robots").get<RobotState>();
  r.targets = j.at("targets").get<std::vector<TargetSet>>();
  r.windows = j.at("windows").get<std::vector<Window>>();
  r.neighbors = j.at("neighbors").get<std::vector<std::vector<std::size_t>>>();
  for (const auto& name : j.at("labels")) {
    const auto a = parse_action(name.get<std::string>());
    if (!a) throw std::runtime_error("record: unknown action " + name.dump());
    r.labels.push_back(static_cast<int>(action_index(*a)));
  }
  r.expert_coverage = j.at("expert_coverage").get<int>();
  if (r.targets.size() != kEpisodeSteps || r.windows.size() != r.robots.size() ||
      r.labels.size() != r.robots.size() || r.neighbors.size() != r.robots.size()) {
    throw std::runtime_error("record " + std::to_string(r.index) + ": inconsistent sizes");
  }
  return r;
}

nlohmann::json fractions_json(const SplitFractions& f) {
  return {{"train", f.train}, {"validation", f.validation}, {"test", f.test}};
}

nlohmann::json split_ranges(const SplitSizes& s, std::size_t count) {
  const std::size_t v0 = s.train, t0 = s.train + s.validation;
  return {{"train", nlohmann::json::array({std::size_t{0}, v0})},
          {"validation", nlohmann::json::array({v0, t0})},
          {"test", nlohmann::json::array({t0, count})}};
}

}  // namespace

void SplitFractions::validate() const {
  if (train < 0.0 || validation < 0.0 || test < 0.0 || std::abs(train + validation + test - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be nonnegative and sum to 1");
  }
}

SplitSizes split_sizes(std::size_t count, const SplitFractions& fractions) {
  fractions.validate();
  SplitSizes s;
  // The epsilon keeps products such as 0.6 * 40000 from flooring to 23999.
  s.train = static_cast<std::size_t>(std::floor(fractions.train * static_cast<double>(count) + 1e-9));
  s.validation = static_cast<std::size_t>(std::floor(fractions.validation * static_cast<double>(count) + 1e-9));
  s.train = std::min(s.train, count);
  s.validation = std::min(s.validation, count - s.train);
  s.test = count - s.train - s.validation;
  return s;
}

WorldState EpisodeRecord::labeled_world() const { return {params, robots, targets.at(kLabelStep), density_seed}; }

CommGraph EpisodeRecord::graph() const { return build_graph(robots, params.comm_range); }

CoverageMap EpisodeRecord::local_map(std::size_t robot, std::size_t step) const {
  return mask_to_window(count_maps.at(step), windows.at(robot));
}

std::vector<CoverageMap> EpisodeRecord::local_maps(std::size_t step) const {
  std::vector<CoverageMap> out;
  for (std::size_t i = 0; i < robots.size(); ++i) out.push_back(local_map(i, step));
  return out;
}

PlannerInput EpisodeRecord::planner_input() const {
  return make_planner_input(params, robots, targets.at(kLabelStep));
}

EpisodeRecord generate_episode(const ScenarioSpec& spec, std::size_t index) {
  spec.params.validate();
  EpisodeRecord r;
  r.index = index;
  r.seed = derive_seed(spec.seed, index);
  r.params = spec.params;
  r.density_seed = derive_seed(r.seed, 1);
  const DensityField density =
      generate_density(spec.params, DensityGenConfig::scaled_for(spec.params.grid_size), r.density_seed);
  r.density_retries = density.retries;
  r.robots = sample_robots(spec.params, spec.robots, derive_seed(r.seed, 3));
  r.targets.push_back(sample_targets(density, spec.params, derive_seed(r.seed, 2)));
  while (r.targets.size() < kEpisodeSteps) r.targets.push_back(step_targets(r.targets.back(), spec.params));
  for (const TargetSet& t : r.targets) r.count_maps.push_back(rasterize_counts(t, spec.params.grid_size));
  r.next_occupancy = rasterize_occupancy(r.targets[kLabelStep], spec.params.grid_size);
  for (const Cell& c : r.robots.positions) r.windows.push_back(reachable_window(c, spec.params));
  const CommGraph graph = r.graph();
  for (std::size_t i = 0; i < graph.size(); ++i) r.neighbors.push_back(graph.neighbors(i));

  const PlanResult plan = expert_plan(r.planner_input());
  for (std::size_t i = 0; i < r.robots.size(); ++i) {
    r.labels.push_back(static_cast<int>(action_index(plan.assignment.action(i).value())));
  }
  r.expert_coverage = coverage(r.labeled_world(), plan.assignment);
  return r;
}

bool label_consistent(const EpisodeRecord& record) {
  const PlanResult plan = expert_plan(record.planner_input());
  for (std::size_t i = 0; i < record.labels.size(); ++i) {
    if (static_cast<int>(action_index(plan.assignment.action(i).value())) != record.labels[i]) return false;
  }
  return coverage(record.labeled_world(), plan.assignment) == record.expert_coverage;
}

std::string record_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rec_%06zu", index);
  return buf;
}

void save_record(const fs::path& dir, const EpisodeRecord& record) {
  write_text_file(dir / (record_stem(record.index) + ".json"), record_json(record).dump(1) + "\n");
  write_text_file(dir / (record_stem(record.index) + ".bin"), encode_blob(record));
}

EpisodeRecord load_record(const fs::path& dir, std::size_t index) {
  const std::string stem = record_stem(index);
  const nlohmann::json j = nlohmann::json::parse(read_text_file(dir / (stem + ".json")));
  if (j.value("format", "") != kDatasetFormat || j.value("version", 0) != kDatasetVersion) {
    throw std::runtime_error(stem + ": unsupported record format");
  }
  EpisodeRecord r = record_from_json(j);
  if (r.index != index) throw std::runtime_error(stem + ": index mismatch");
  decode_blob(read_text_file(dir / (stem + ".bin")), r);
  return r;
}

DatasetManifest generate_dataset(const fs::path& dir, std::size_t count, const ScenarioSpec& spec,
                                 const SplitFractions& fractions, std::size_t jobs) {
  if (count < 1) throw std::invalid_argument("generate_dataset: count must be >= 1");
  spec.params.validate();
  fractions.validate();
  fs::create_directories(dir);
  // An existing manifest would certify a half-rewritten directory.
  fs::remove(dir / "manifest.json");

  DatasetManifest m;
  m.count = count;
  m.spec = spec;
  m.fractions = fractions;
  m.splits = split_sizes(count, fractions);
  m.record_checksums.resize(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    const EpisodeRecord r = generate_episode(spec, i);
    save_record(dir, r);
    const std::string stem = record_stem(i);
    m.record_checksums[i] = hex32(crc32_file(dir / (stem + ".bin"), crc32_file(dir / (stem + ".json"))));
  });
  std::uint32_t crc = 0;
  for (const std::string& c : m.record_checksums) crc = crc32(c, crc);
  m.checksum = hex32(crc);

  nlohmann::json j = {{"format", m.format},
                      {"version", m.version},
                      {"count", m.count},
                      {"robots", spec.robots},
                      {"seed", spec.seed},
                      {"params", spec.params},
                      {"fractions", fractions_json(fractions)},
                      {"splits", split_ranges(m.splits, count)},
                      {"record_checksums", m.record_checksums},
                      {"checksum_crc32", m.checksum}};
  const fs::path tmp = dir / "manifest.json.tmp";
  write_text_file(tmp, j.dump(2) + "\n");
  fs::rename(tmp, dir / "manifest.json");
  return m;
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) {
    throw std::runtime_error(dir.string() + ": no manifest.json (missing or incomplete dataset)");
  }
  const nlohmann::json j = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  if (j.value("format", "") != kDatasetFormat) throw std::runtime_error(dir.string() + ": not a dataset");
  if (j.value("version", 0) != kDatasetVersion) {
    throw std::runtime_error(dir.string() + ": unsupported dataset version " + j.at("version").dump());
  }
  Dataset d;
  DatasetManifest& m = d.manifest;
  m.count = j.at("count").get<std::size_t>();
  m.spec.robots = j.at("robots").get<std::size_t>();
  m.spec.seed = j.at("seed").get<std::uint64_t>();
  m.spec.params = j.at("params").get<WorldParams>();
  const auto& f = j.at("fractions");
  m.fractions = {f.at("train").get<double>(), f.at("validation").get<double>(), f.at("test").get<double>()};
  m.splits = split_sizes(m.count, m.fractions);
  m.record_checksums = j.at("record_checksums").get<std::vector<std::string>>();
  m.checksum = j.at("checksum_crc32").get<std::string>();
  if (m.record_checksums.size() != m.count) throw std::runtime_error(dir.string() + ": checksum count mismatch");
  std::uint32_t crc = 0;
  for (const std::string& c : m.record_checksums) crc = crc32(c, crc);
  if (hex32(crc) != m.checksum) throw std::runtime_error(dir.string() + ": manifest checksum mismatch");

  d.records.reserve(m.count);
  for (std::size_t i = 0; i < m.count; ++i) {
    const std::string stem = record_stem(i);
    const std::string got = hex32(crc32_file(dir / (stem + ".bin"), crc32_file(dir / (stem + ".json"))));
    if (got != m.record_checksums[i]) throw std::runtime_error(stem + ": checksum mismatch");
    d.records.push_back(load_record(dir, i));
  }
  return d;
}

std::span<const EpisodeRecord> Dataset::train() const {
  return std::span<const EpisodeRecord>(records).subspan(0, manifest.splits.train);
}
std::span<const EpisodeRecord> Dataset::validation() const {
  return std::span<const EpisodeRecord>(records).subspan(manifest.splits.train, manifest.splits.validation);
}
std::span<const EpisodeRecord> Dataset::test() const {
  return std::span<const EpisodeRecord>(records).subspan(manifest.splits.train + manifest.splits.validation);
}

PlanningSample planning_sample(const EpisodeRecord& record) {
  return {stack_recentred(record.local_maps(kLabelStep), record.robots.positions), normalize(record.graph()).shift,
          record.labels};
}

std::vector<PlanningSample> planning_samples(std::span<const EpisodeRecord> records) {
  std::vector<PlanningSample> out;
  out.reserve(records.size());
  for (const EpisodeRecord& r : records) out.push_back(planning_sample(r));
  return out;
}

PredictionSample prediction_sample(const EpisodeRecord& record, bool local_history) {
  const std::size_t n = record.robots.size();
  const auto g = static_cast<std::size_t>(record.params.grid_size);
  const std::size_t plane = g * g;
  constexpr std::size_t h = kEpisodeSteps - 1;
  PredictionSample s;
  s.histories = nn::Tensor<float>({n, h, g, g});
  s.window_masks = nn::Tensor<float>({n, 1, g, g});
  s.next_occupancy.assign(n * plane, 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    const Window& w = record.windows[i];
    for (std::size_t t = 0; t < h; ++t) {
      const CoverageMap m = local_history ? record.local_map(i, t) : record.count_maps[t];
      std::copy(m.values.begin(), m.values.end(), s.histories.ptr() + (i * h + t) * plane);
    }
    for (int y = w.y0; y <= w.y1; ++y) {
      for (int x = w.x0; x <= w.x1; ++x) {
        const std::size_t c = static_cast<std::size_t>(y) * g + static_cast<std::size_t>(x);
        s.window_masks[i * plane + c] = 1.0f;
        s.next_occupancy[i * plane + c] = record.next_occupancy.values[c];
      }
    }
  }
  s.robots = record.robots.positions;
  s.shift = normalize(record.graph()).shift;
  s.labels = record.labels;
  return s;
}

std::vector<PredictionSample> prediction_samples(std::span<const EpisodeRecord> records, bool local_history) {
  std::vector<PredictionSample> out;
  out.reserve(records.size());
  for (const EpisodeRecord& r : records) out.push_back(prediction_sample(r, local_history));
  return out;
}

}  // namespace covplan
