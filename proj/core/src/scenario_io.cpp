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
#include "covplan/scenario_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace covplan {

void to_json(nlohmann::json& j, const Cell& c) { j = nlohmann::json::array({c.x, c.y}); }
void from_json(const nlohmann::json& j, Cell& c) {
  c.x = j.at(0).get<int>();
  c.y = j.at(1).get<int>();
}

void to_json(nlohmann::json& j, const Window& w) { j = nlohmann::json::array({w.x0, w.y0, w.x1, w.y1}); }
void from_json(const nlohmann::json& j, Window& w) {
  w.x0 = j.at(0).get<int>();
  w.y0 = j.at(1).get<int>();
  w.x1 = j.at(2).get<int>();
  w.y1 = j.at(3).get<int>();
}

void to_json(nlohmann::json& j, const WorldParams& p) {
  j = {{"grid_size", p.grid_size},         {"sensing_range", p.sensing_range},
       {"step_distance", p.step_distance}, {"comm_range", p.comm_range},
       {"fill_fraction", p.fill_fraction}, {"target_speed", p.target_speed}};
}

void from_json(const nlohmann::json& j, WorldParams& p) {
  p.grid_size = j.at("grid_size").get<int>();
  p.sensing_range = j.at("sensing_range").get<int>();
  p.step_distance = j.at("step_distance").get<int>();
  p.comm_range = j.at("comm_range").get<double>();
  p.fill_fraction = j.at("fill_fraction").get<double>();
  p.target_speed = j.at("target_speed").get<double>();
}

void to_json(nlohmann::json& j, const TargetSet& t) {
  nlohmann::json pos = nlohmann::json::array(), vel = nlohmann::json::array();
  for (const Vec2& p : t.positions) pos.push_back({p.x, p.y});
  for (const Vec2& v : t.velocities) vel.push_back({v.x, v.y});
  j = {{"positions", std::move(pos)}, {"velocities", std::move(vel)}};
}

void from_json(const nlohmann::json& j, TargetSet& t) {
  t.positions.clear();
  t.velocities.clear();
  for (const auto& p : j.at("positions")) t.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  for (const auto& v : j.at("velocities")) t.velocities.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  if (t.positions.size() != t.velocities.size()) {
    throw std::runtime_error("scenario: target position and velocity counts differ");
  }
}

void to_json(nlohmann::json& j, const RobotState& r) { j = r.positions; }
void from_json(const nlohmann::json& j, RobotState& r) { r.positions = j.get<std::vector<Cell>>(); }

void to_json(nlohmann::json& j, const WorldState& w) {
  j = {{"params", w.params}, {"density_seed", w.density_seed}, {"robots", w.robots}, {"targets", w.targets}};
}

void from_json(const nlohmann::json& j, WorldState& w) {
  w.params = j.at("params").get<WorldParams>();
  w.density_seed = j.at("density_seed").get<std::uint64_t>();
  w.robots = j.at("robots").get<RobotState>();
  w.targets = j.at("targets").get<TargetSet>();
}

nlohmann::json adjacency_lists(const CommGraph& graph) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < graph.size(); ++i) out.push_back(graph.neighbors(i));
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_scenario(const std::filesystem::path& path, const WorldState& world) {
  nlohmann::json j = {{"format", kScenarioFormat}, {"version", kScenarioVersion}, {"world", world}};
  write_text_file(path, j.dump(2) + "\n");
}

WorldState load_scenario(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  if (j.value("format", "") != kScenarioFormat) {
    throw std::runtime_error(path.string() + ": not a scenario file");
  }
  if (j.value("version", 0) != kScenarioVersion) {
    throw std::runtime_error(path.string() + ": unsupported scenario version " + j.at("version").dump());
  }
  WorldState w = j.at("world").get<WorldState>();
  w.params.validate();
  return w;
}

}  // namespace covplan
