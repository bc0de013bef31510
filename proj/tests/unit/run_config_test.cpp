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
#include <gtest/gtest.h>

#include <fstream>

#include "covplan/run_config.hpp"
#include "test_dirs.hpp"

namespace covplan {
namespace {

using ConfigFile = testing_support::ScratchDir;

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

TEST(Profiles, DeskAndPaperDefaults) {
  const RunConfig desk = resolve_config(std::nullopt, std::nullopt, {});
  EXPECT_EQ(desk.profile, "desk");
  EXPECT_EQ(desk.world, WorldParams::desk());
  EXPECT_EQ(desk.planner.feature_length(), 256u);
  const RunConfig paper = resolve_config("paper", std::nullopt, {});
  EXPECT_EQ(paper.world, WorldParams::paper());
  EXPECT_EQ(paper.planner.feature_length(), 1600u);
  EXPECT_EQ(paper.dmp_train.epochs, 2000);
  EXPECT_THROW(resolve_config("laptop", std::nullopt, {}), ConfigError);
}

TEST_F(ConfigFile, FlagsOverrideFileOverrideDefaults) {
  write(dir_ / "c.json", R"({"world": {"grid_size": 40, "sensing_range": 2}, "scenario": {"robots": 9}})");
  const RunConfig c = resolve_config(std::nullopt, dir_ / "c.json", {{"world.grid_size", "48"}});
  EXPECT_EQ(c.world.grid_size, 48);
  EXPECT_EQ(c.world.sensing_range, 2);
  EXPECT_EQ(c.robots, 9u);
  EXPECT_EQ(c.world.step_distance, 8);
  EXPECT_EQ(c.provenance.at("world.grid_size"), ConfigSource::Flag);
  EXPECT_EQ(c.provenance.at("world.sensing_range"), ConfigSource::File);
  EXPECT_EQ(c.provenance.at("world.step_distance"), ConfigSource::Default);
  const auto j = c.resolved_json();
  EXPECT_EQ(j.at("world.grid_size").at("source"), "flag");
  EXPECT_EQ(j.at("world.grid_size").at("value"), 48);
}

TEST_F(ConfigFile, UnknownKeysWrongTypesAndConflicts) {
  write(dir_ / "unknown.json", R"({"world": {"gird_size": 40}})");
  EXPECT_THROW(resolve_config(std::nullopt, dir_ / "unknown.json", {}), ConfigError);
  write(dir_ / "type.json", R"({"world": {"grid_size": "big"}})");
  EXPECT_THROW(resolve_config(std::nullopt, dir_ / "type.json", {}), ConfigError);
  write(dir_ / "paper.json", R"({"profile": "paper"})");
  EXPECT_THROW(resolve_config("desk", dir_ / "paper.json", {}), ConfigError);
  EXPECT_EQ(resolve_config(std::nullopt, dir_ / "paper.json", {}).profile, "paper");
  EXPECT_THROW(resolve_config(std::nullopt, std::nullopt, {{"world.grid_size", "x"}}), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, std::nullopt, {{"no.such", "1"}}), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, dir_ / "missing.json", {}), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, std::nullopt, {{"world.sensing_range", "0"}}), ConfigError);
}

TEST(Flags, ListsAndRegime) {
  const RunConfig c = resolve_config(std::nullopt, std::nullopt,
                                     {{"planner.gnn_widths", "[8,4]"},
                                      {"dmp_train.regime", "joint"},
                                      {"bench.planners", "[\"expert\",\"dg\"]"}});
  EXPECT_EQ(c.planner.gnn_widths, (std::vector<std::size_t>{8, 4}));
  EXPECT_EQ(c.regime, DmpRegime::Joint);
  EXPECT_EQ(c.bench.planners, (std::vector<std::string>{"expert", "dg"}));
}

}  // namespace
}  // namespace covplan
