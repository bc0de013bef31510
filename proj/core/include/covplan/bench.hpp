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
#ifndef COVPLAN_BENCH_HPP_
#define COVPLAN_BENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "covplan/d2coplan.hpp"
#include "covplan/datagen.hpp"
#include "covplan/dmp.hpp"
#include "covplan/registry.hpp"
#include "covplan/world.hpp"

namespace covplan {

inline constexpr std::string_view kBenchSchema = "covplan-bench-csv";
inline constexpr int kBenchSchemaVersion = 1;

enum class SweepVariable { None, RobotCount, TargetDensity };

std::string_view variable_name(SweepVariable v);
SweepVariable parse_variable(std::string_view name);

struct TrialResult {
  std::string variable;
  double value = 0.0;
  std::string planner;
  std::size_t trial = 0;
  std::uint64_t trial_seed = 0;
  std::size_t robots = 0;
  double fill_fraction = 0.0;
  int coverage = 0;
  int expert_coverage = 0;
  double decision_latency = 0.0;  // seconds, planner latency model
  double total_latency = 0.0;     // seconds, wall clock of the call

  // covered(planner) / covered(Expert); 1 when the Expert covers nothing,
  // which only happens when no target is reachable by anyone.
  double relative_coverage() const;
};

struct Aggregate {
  std::string variable;
  double value = 0.0;
  std::string planner;
  std::size_t trials = 0;
  double mean_relative_coverage = 0.0;
  double stderr_relative_coverage = 0.0;
  double mean_coverage = 0.0;
  double mean_expert_coverage = 0.0;
  double mean_latency = 0.0;
  double median_of_means_latency = 0.0;
};

struct SweepSpec {
  SweepVariable variable = SweepVariable::None;
  std::vector<double> values;  // robot counts or fill fractions; ignored for None
  std::size_t trials = 200;
  std::vector<std::string> planners;
  std::uint64_t seed = 1;
  WorldParams params;
  std::size_t robots = 6;
  std::size_t jobs = 0;
  std::size_t warmup = 0;
  bool serial_timing = false;

  void validate() const;
};

// Paired Monte-Carlo trials: instance t of every sweep value is
// generate_episode(seed, t) with the swept field overridden, and every planner
// sees that same instance. Rows are ordered by value, trial, planner list
// order. Missing weights or unknown planners throw before any trial runs.
std::vector<TrialResult> run_trials(const SweepSpec& spec, const PlannerOptions& options);

std::vector<Aggregate> aggregate(std::span<const TrialResult> rows);

// Median over min(5, n) contiguous group means.
double median_of_means(std::span<const double> values, std::size_t groups = 5);

// Robot-count sweep in serial timing mode. Counts must be ascending.
std::vector<TrialResult> measure_scaling(std::span<const std::size_t> counts,
                                         std::span<const std::string> planners, std::size_t trials,
                                         const WorldParams& params, std::uint64_t seed,
                                         const PlannerOptions& options, std::size_t warmup = 2);

const Aggregate& find_aggregate(std::span<const Aggregate> aggs, std::string_view planner, double value);

// CSV with a versioned comment header, a column row, per-trial rows and
// aggregate rows (kind column distinguishes them).
void write_csv(std::ostream& out, std::span<const TrialResult> rows);
void write_csv(const std::filesystem::path& path, std::span<const TrialResult> rows);

// Parses the trial rows back; used to check aggregates against recomputation.
std::vector<TrialResult> read_trial_rows(std::istream& in);

struct PredictedEval {
  double mean_coverage = 0.0;
  double mean_relative_coverage = 0.0;
};

// Predicted maps feed either the network (planner != nullptr) or DG; scored
// against the true targets at the label step.
PredictedEval evaluate_predicted(DmpNet<float>& dmp, D2CoPlanNet<float>* planner,
                                 std::span<const EpisodeRecord> records,
                                 std::span<const PredictionSample> samples);

struct RegimeSpec {
  std::span<const EpisodeRecord> train;
  std::span<const EpisodeRecord> validation;
  std::span<const EpisodeRecord> eval;
  D2CoPlanConfig planner_config;
  TrainConfig planner_train;
  DmpConfig dmp_config;
  DmpTrainConfig dmp_train;
  std::vector<DmpRegime> regimes = {DmpRegime::Joint, DmpRegime::Separate, DmpRegime::FrozenDownstream};
  int curve_every = 0;  // 0: evaluate the final epoch only
  bool local_history = true;
  // Ground-truth-trained planner to reuse; trained from `train` otherwise.
  std::optional<nn::WeightStore> pretrained_planner;
};

struct RegimeCurvePoint {
  std::string regime;
  int epoch = 0;
  double mean_coverage = 0.0;
  double mean_relative_coverage = 0.0;
};

struct RegimeReport {
  std::vector<RegimeCurvePoint> curves;
  // Final point per combination: the regimes plus "separate+dg".
  std::vector<RegimeCurvePoint> finals;
  nn::WeightStore planner;

  const RegimeCurvePoint& final_of(std::string_view name) const;
};

RegimeReport run_regimes(const RegimeSpec& spec);

void write_regime_csv(const std::filesystem::path& path, const RegimeReport& report);

}  // namespace covplan

#endif  // COVPLAN_BENCH_HPP_
