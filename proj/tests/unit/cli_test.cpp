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

#include <sstream>

#include "cli.hpp"
#include "covplan/bench.hpp"
#include "covplan/datagen.hpp"
#include "test_dirs.hpp"

namespace covplan {
namespace {

using testing_support::same_tree;
using testing_support::slurp;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "covplan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

using Cli = testing_support::ScratchDir;

TEST_F(Cli, GenDataIdenticalAcrossJobs) {
  const std::string a = (dir_ / "a").string(), b = (dir_ / "b").string();
  ASSERT_EQ(run({"gen-data", "--count", "6", "--out", a, "--jobs", "1", "--seed", "5"}).code, cli::kOk);
  ASSERT_EQ(run({"gen-data", "--count", "6", "--out", b, "--jobs", "2", "--seed", "5"}).code, cli::kOk);
  EXPECT_TRUE(same_tree(dir_ / "a", dir_ / "b"));
  EXPECT_EQ(load_dataset(dir_ / "a").records.size(), 6u);
}

TEST_F(Cli, EvalWritesOneRowPerInstance) {
  const std::string data = (dir_ / "d").string();
  ASSERT_EQ(run({"gen-data", "--count", "10", "--out", data}).code, cli::kOk);
  const std::string csv = (dir_ / "eval.csv").string();
  const Outcome o = run({"eval", "--planner", "expert", "--dataset", data, "--out", csv});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  std::istringstream in(slurp(csv));
  const auto rows = read_trial_rows(in);
  ASSERT_EQ(rows.size(), 10u);
  for (const auto& r : rows) EXPECT_EQ(r.relative_coverage(), 1.0);
  const std::string test_csv = (dir_ / "test.csv").string();
  ASSERT_EQ(run({"eval", "--planner", "dg", "--dataset", data, "--split", "test", "--out", test_csv}).code,
            cli::kOk);
  std::istringstream test_in(slurp(test_csv));
  EXPECT_EQ(read_trial_rows(test_in).size(), 2u);
}

TEST_F(Cli, TrainPlannerThenEvalWithWeights) {
  const std::string data = (dir_ / "d").string();
  ASSERT_EQ(run({"gen-data", "--count", "10", "--out", data}).code, cli::kOk);
  const std::string model = (dir_ / "m").string();
  const Outcome t = run({"train-planner", "--dataset", data, "--epochs", "1", "--out", model,
                         "--set", "planner.encoder_channels=[2,4,8]", "--set", "planner.gnn_widths=[8,4]"});
  ASSERT_EQ(t.code, cli::kOk) << t.err;
  EXPECT_TRUE(std::filesystem::exists(dir_ / "m" / "planner.json"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "m" / "training_log.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "m" / "resolved_config.json"));
  const Outcome e = run({"eval", "--planner", "d2coplan", "--dataset", data, "--weights",
                         (dir_ / "m" / "planner").string(), "--out", (dir_ / "e.csv").string(),
                         "--set", "planner.encoder_channels=[2,4,8]", "--set", "planner.gnn_widths=[8,4]"});
  EXPECT_EQ(e.code, cli::kOk) << e.err;
  const Outcome mismatch = run({"eval", "--planner", "d2coplan", "--dataset", data, "--weights",
                                (dir_ / "m" / "planner").string(), "--out", (dir_ / "f.csv").string()});
  EXPECT_EQ(mismatch.code, cli::kRuntimeError);
}

TEST_F(Cli, BenchCompareWritesCsv) {
  const std::string csv = (dir_ / "b.csv").string();
  const Outcome o = run({"bench", "compare", "--trials", "3", "--planners", "expert,dg", "--out", csv});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  std::istringstream in(slurp(csv));
  EXPECT_EQ(read_trial_rows(in).size(), 6u);
}

TEST(CliErrors, UsageErrorsExitTwo) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {}, {"frobnicate"}, {"gen-data", "--count", "3"}, {"eval", "--planner", "nope", "--dataset", "x", "--out", "y"},
           {"gen-data", "--count", "3", "--out", "/tmp/x", "--set", "world.gird=3"},
           {"bench", "compare", "--planners", "d2coplan", "--out", "/tmp/x.csv"}}) {
    const Outcome o = run(args);
    EXPECT_EQ(o.code, cli::kUsageError) << (args.empty() ? "" : args[0]) << " " << o.err;
    if (!args.empty()) {
      EXPECT_NE(o.err.find("error: code=usage"), std::string::npos) << o.err;
    }
  }
}

TEST(CliErrors, MissingDatasetIsRuntimeError) {
  const Outcome o = run({"eval", "--planner", "dg", "--dataset", "/nonexistent/ds", "--out", "/tmp/covplan_x.csv"});
  EXPECT_EQ(o.code, cli::kRuntimeError);
  EXPECT_NE(o.err.find("error: code=runtime"), std::string::npos);
}

TEST(CliGradCheck, Passes) {
  const Outcome o = run({"grad-check"});
  EXPECT_EQ(o.code, cli::kOk) << o.out << o.err;
}

}  // namespace
}  // namespace covplan
