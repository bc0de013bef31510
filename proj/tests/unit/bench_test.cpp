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

#include <cmath>
#include <sstream>

#include "covplan/bench.hpp"
#include "covplan/registry.hpp"

namespace covplan {
namespace {

SweepSpec small_spec(std::vector<std::string> planners, std::size_t trials = 6) {
  SweepSpec s;
  s.trials = trials;
  s.planners = std::move(planners);
  s.seed = 3;
  return s;
}

TEST(Trials, ExpertAgainstItselfIsOne) {
  const auto rows = run_trials(small_spec({"expert"}), {});
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.coverage, r.expert_coverage);
    EXPECT_EQ(r.relative_coverage(), 1.0);
  }
}

TEST(Trials, OneTrialGivesOneRowPerPlanner) {
  const auto rows = run_trials(small_spec({"dg", "random"}, 1), {});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].planner, "dg");
  EXPECT_EQ(rows[1].planner, "random");
  EXPECT_EQ(rows[0].trial_seed, rows[1].trial_seed);
}

TEST(Trials, PairedAndDeterministicAcrossJobs) {
  SweepSpec a = small_spec({"expert", "dg", "random"});
  a.jobs = 1;
  SweepSpec b = a;
  b.jobs = 3;
  const auto ra = run_trials(a, {});
  const auto rb = run_trials(b, {});
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].coverage, rb[i].coverage);
    EXPECT_EQ(ra[i].trial_seed, rb[i].trial_seed);
  }
}

TEST(Trials, RandomBelowDg) {
  const auto rows = run_trials(small_spec({"dg", "random"}, 40), {});
  const auto aggs = aggregate(rows);
  EXPECT_LT(find_aggregate(aggs, "random", 0.0).mean_relative_coverage,
            find_aggregate(aggs, "dg", 0.0).mean_relative_coverage);
}

TEST(Trials, ErrorsBeforeAnyTrial) {
  EXPECT_THROW(run_trials(small_spec({"d2coplan"}), {}), std::runtime_error);
  EXPECT_THROW(run_trials(small_spec({"nope"}), {}), std::invalid_argument);
  EXPECT_THROW(check_planner("d2coplan", {}), std::runtime_error);
  EXPECT_NO_THROW(check_planner("dg", {}));
}

TEST(Trials, SweepOverridesField) {
  SweepSpec s = small_spec({"expert"}, 2);
  s.variable = SweepVariable::RobotCount;
  s.values = {3, 5};
  const auto rows = run_trials(s, {});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].robots, 3u);
  EXPECT_EQ(rows[3].robots, 5u);
  s.variable = SweepVariable::TargetDensity;
  s.values = {0.05, 0.3};
  const auto dens = run_trials(s, {});
  EXPECT_EQ(dens[0].fill_fraction, 0.05);
  EXPECT_LT(dens[0].expert_coverage, dens[2].expert_coverage);
}

TEST(Aggregate, RecomputesFromCsv) {
  const auto rows = run_trials(small_spec({"expert", "dg"}, 7), {});
  std::stringstream csv;
  write_csv(csv, rows);
  EXPECT_EQ(csv.str().rfind("# covplan-bench-csv", 0), 0u);
  const auto back = read_trial_rows(csv);
  ASSERT_EQ(back.size(), rows.size());
  const auto aggs = aggregate(back);
  std::vector<double> rel;
  for (const auto& r : rows)
    if (r.planner == "dg") rel.push_back(r.relative_coverage());
  double mean = 0.0;
  for (double v : rel) mean += v;
  mean /= static_cast<double>(rel.size());
  double var = 0.0;
  for (double v : rel) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / static_cast<double>(rel.size() - 1) / static_cast<double>(rel.size()));
  const Aggregate& dg = find_aggregate(aggs, "dg", 0.0);
  EXPECT_NEAR(dg.mean_relative_coverage, mean, 1e-12);
  EXPECT_NEAR(dg.stderr_relative_coverage, se, 1e-12);
  EXPECT_EQ(dg.trials, 7u);
}

TEST(Aggregate, MedianOfMeans) {
  const std::vector<double> v = {1, 1, 2, 2, 3, 3, 4, 4, 100, 100};
  EXPECT_EQ(median_of_means(v), 3.0);
  const std::vector<double> three = {5, 1, 3};
  EXPECT_EQ(median_of_means(three), 3.0);
}

TEST(Scaling, RequiresAscendingCounts) {
  const std::vector<std::size_t> bad = {5, 3};
  const std::vector<std::string> planners = {"expert"};
  EXPECT_THROW(measure_scaling(bad, planners, 1, WorldParams{}, 1, {}, 0), std::invalid_argument);
  const std::vector<std::size_t> ok = {2, 4};
  const auto rows = measure_scaling(ok, planners, 2, WorldParams{}, 1, {}, 0);
  EXPECT_EQ(rows.size(), 4u);
}

TEST(Registry, NamesAndFreshInstances) {
  EXPECT_EQ(planner_names(), (std::vector<std::string>{"expert", "bruteforce", "dg", "random", "d2coplan"}));
  auto a = make_planner("random", {}, 1);
  auto b = make_planner("random", {}, 1);
  EXPECT_NE(a.get(), b.get());
  EXPECT_EQ(a->name(), "random");
}

}  // namespace
}  // namespace covplan
