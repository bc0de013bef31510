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
#include "covplan/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "covplan/objective.hpp"
#include "covplan/parallel.hpp"
#include "covplan/rng.hpp"

namespace covplan {
namespace {

constexpr std::uint64_t kWarmupStream = 0x5741524d;
constexpr std::uint64_t kRandomStream = 0x52414e44;

const char* kColumns =
    "kind,variable,value,planner,trial,trial_seed,robots,fill_fraction,coverage,expert_coverage,"
    "relative_coverage,decision_latency_s,total_latency_s,trials,stderr_relative_coverage,"
    "median_of_means_latency_s";

std::vector<double> sweep_values(const SweepSpec& spec) {
  if (spec.variable == SweepVariable::None) return {0.0};
  return spec.values;
}

ScenarioSpec scenario_for(const SweepSpec& spec, double value, std::uint64_t seed) {
  ScenarioSpec s{spec.params, spec.robots, seed};
  if (spec.variable == SweepVariable::RobotCount) s.robots = static_cast<std::size_t>(value);
  if (spec.variable == SweepVariable::TargetDensity) s.params.fill_fraction = value;
  return s;
}

TrialResult run_one(const EpisodeRecord& record, Planner& planner, std::string_view variable, double value) {
  const PlannerInput input = record.planner_input();
  const PlanResult plan = planner.plan(input);
  TrialResult r;
  r.variable = std::string(variable);
  r.value = value;
  r.planner = std::string(planner.name());
  r.trial = record.index;
  r.trial_seed = record.seed;
  r.robots = record.robots.size();
  r.fill_fraction = record.params.fill_fraction;
  r.coverage = coverage(record.labeled_world(), plan.assignment);
  r.expert_coverage = record.expert_coverage;
  r.decision_latency = plan.decision_latency();
  r.total_latency = plan.total_latency;
  return r;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string_view variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::None: return "none";
    case SweepVariable::RobotCount: return "robots";
    case SweepVariable::TargetDensity: return "density";
  }
  return "?";
}

SweepVariable parse_variable(std::string_view name) {
  if (name == "none") return SweepVariable::None;
  if (name == "robots") return SweepVariable::RobotCount;
  if (name == "density") return SweepVariable::TargetDensity;
  throw std::invalid_argument("unknown sweep variable '" + std::string(name) + "'");
}

double TrialResult::relative_coverage() const {
  if (expert_coverage == 0) return 1.0;
  return static_cast<double>(coverage) / static_cast<double>(expert_coverage);
}

void SweepSpec::validate() const {
  params.validate();
  if (variable != SweepVariable::None && values.empty()) throw std::invalid_argument("sweep: empty value list");
  if (planners.empty()) throw std::invalid_argument("sweep: no planners");
  if (trials == 0) throw std::invalid_argument("sweep: trials must be >= 1");
  for (double v : values) {
    if (variable == SweepVariable::RobotCount && (v < 1.0 || v != std::floor(v))) {
      throw std::invalid_argument("sweep: robot counts must be positive integers");
    }
    if (variable == SweepVariable::TargetDensity && !(v > 0.0 && v <= 1.0)) {
      throw std::invalid_argument("sweep: densities must lie in (0, 1]");
    }
  }
}

std::vector<TrialResult> run_trials(const SweepSpec& spec, const PlannerOptions& options) {
  spec.validate();
  for (const std::string& p : spec.planners) check_planner(p, options);
  const std::vector<double> values = sweep_values(spec);
  const std::string variable(variable_name(spec.variable));
  const std::size_t jobs = spec.serial_timing ? 1 : spec.jobs;
  const std::size_t np = spec.planners.size();

  if (spec.warmup > 0) {
    for (double v : values) {
      const ScenarioSpec s = scenario_for(spec, v, derive_seed(spec.seed, kWarmupStream));
      for (std::size_t w = 0; w < spec.warmup; ++w) {
        const EpisodeRecord rec = generate_episode(s, w);
        for (const std::string& p : spec.planners) {
          auto planner = make_planner(p, options, derive_seed(rec.seed, kRandomStream));
          run_one(rec, *planner, variable, v);
        }
      }
    }
  }

  std::vector<TrialResult> rows(values.size() * spec.trials * np);
  parallel_for(values.size() * spec.trials, jobs, [&](std::size_t k) {
    const std::size_t vi = k / spec.trials, t = k % spec.trials;
    const EpisodeRecord rec = generate_episode(scenario_for(spec, values[vi], spec.seed), t);
    for (std::size_t p = 0; p < np; ++p) {
      auto planner = make_planner(spec.planners[p], options, derive_seed(rec.seed, kRandomStream));
      rows[k * np + p] = run_one(rec, *planner, variable, values[vi]);
    }
  });
  return rows;
}

double median_of_means(std::span<const double> values, std::size_t groups) {
  if (values.empty()) return 0.0;
  groups = std::max<std::size_t>(1, std::min(groups, values.size()));
  std::vector<double> means;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = g * values.size() / groups, hi = (g + 1) * values.size() / groups;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    means.push_back(s / static_cast<double>(hi - lo));
  }
  std::sort(means.begin(), means.end());
  const std::size_t m = means.size();
  return m % 2 ? means[m / 2] : 0.5 * (means[m / 2 - 1] + means[m / 2]);
}

std::vector<Aggregate> aggregate(std::span<const TrialResult> rows) {
  // Keyed by first appearance so the output order follows the input order.
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::vector<const TrialResult*>> groups;
  for (const TrialResult& r : rows) {
    auto key = std::make_pair(r.planner, r.value);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<Aggregate> out;
  for (const auto& key : keys) {
    const auto& g = groups[key];
    Aggregate a;
    a.variable = g.front()->variable;
    a.planner = key.first;
    a.value = key.second;
    a.trials = g.size();
    const double n = static_cast<double>(g.size());
    std::vector<double> lat;
    for (const TrialResult* r : g) {
      a.mean_relative_coverage += r->relative_coverage() / n;
      a.mean_coverage += r->coverage / n;
      a.mean_expert_coverage += r->expert_coverage / n;
      a.mean_latency += r->decision_latency / n;
      lat.push_back(r->decision_latency);
    }
    if (g.size() > 1) {
      double ss = 0.0;
      for (const TrialResult* r : g) ss += std::pow(r->relative_coverage() - a.mean_relative_coverage, 2);
      a.stderr_relative_coverage = std::sqrt(ss / (n - 1.0) / n);
    }
    a.median_of_means_latency = median_of_means(lat);
    out.push_back(a);
  }
  return out;
}

const Aggregate& find_aggregate(std::span<const Aggregate> aggs, std::string_view planner, double value) {
  for (const Aggregate& a : aggs) {
    if (a.planner == planner && a.value == value) return a;
  }
  throw std::out_of_range("no aggregate for planner " + std::string(planner));
}

std::vector<TrialResult> measure_scaling(std::span<const std::size_t> counts,
                                         std::span<const std::string> planners, std::size_t trials,
                                         const WorldParams& params, std::uint64_t seed,
                                         const PlannerOptions& options, std::size_t warmup) {
  if (counts.empty()) throw std::invalid_argument("measure_scaling: no robot counts");
  if (!std::is_sorted(counts.begin(), counts.end())) {
    throw std::invalid_argument("measure_scaling: robot counts must be ascending");
  }
  SweepSpec spec;
  spec.variable = SweepVariable::RobotCount;
  for (std::size_t c : counts) spec.values.push_back(static_cast<double>(c));
  spec.planners.assign(planners.begin(), planners.end());
  spec.trials = trials;
  spec.params = params;
  spec.seed = seed;
  spec.warmup = warmup;
  spec.serial_timing = true;
  return run_trials(spec, options);
}

void write_csv(std::ostream& out, std::span<const TrialResult> rows) {
  out << "# " << kBenchSchema << " v" << kBenchSchemaVersion << "; columns: " << kColumns
      << "; relative_coverage = coverage / expert_coverage per instance; latency in seconds"
      << " (decentralized: max per-robot compute, centralized: wall clock)\n";
  out << kColumns << "\n";
  out << std::setprecision(17);
  for (const TrialResult& r : rows) {
    out << "trial," << r.variable << "," << r.value << "," << r.planner << "," << r.trial << ","
        << r.trial_seed << "," << r.robots << "," << r.fill_fraction << "," << r.coverage << ","
        << r.expert_coverage << "," << r.relative_coverage() << "," << r.decision_latency << ","
        << r.total_latency << ",,,\n";
  }
  for (const Aggregate& a : aggregate(rows)) {
    out << "aggregate," << a.variable << "," << a.value << "," << a.planner << ",,,,," << a.mean_coverage
        << "," << a.mean_expert_coverage << "," << a.mean_relative_coverage << "," << a.mean_latency
        << ",," << a.trials << "," << a.stderr_relative_coverage << "," << a.median_of_means_latency << "\n";
  }
}

void write_csv(const std::filesystem::path& path, std::span<const TrialResult> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  write_csv(out, rows);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<TrialResult> read_trial_rows(std::istream& in) {
  std::vector<TrialResult> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("trial,", 0) != 0) continue;
    const auto f = split_csv(line);
    if (f.size() < 13) throw std::runtime_error("bench csv: short trial row");
    TrialResult r;
    r.variable = f[1];
    r.value = std::stod(f[2]);
    r.planner = f[3];
    r.trial = std::stoull(f[4]);
    r.trial_seed = std::stoull(f[5]);
    r.robots = std::stoull(f[6]);
    r.fill_fraction = std::stod(f[7]);
    r.coverage = std::stoi(f[8]);
    r.expert_coverage = std::stoi(f[9]);
    r.decision_latency = std::stod(f[11]);
    r.total_latency = std::stod(f[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

PredictedEval evaluate_predicted(DmpNet<float>& dmp, D2CoPlanNet<float>* planner,
                                 std::span<const EpisodeRecord> records,
                                 std::span<const PredictionSample> samples) {
  if (records.size() != samples.size()) throw std::invalid_argument("evaluate_predicted: size mismatch");
  PredictedEval e;
  if (records.empty()) return e;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const EpisodeRecord& rec = records[k];
    PlannerInput input;
    input.params = rec.params;
    input.robots = rec.robots;
    input.local_maps = predicted_local_maps(dmp, samples[k], rec.windows);
    input.graph = rec.graph();
    const Assignment a = planner ? d2coplan_plan(*planner, input.local_maps, input.graph).result.assignment
                                 : dg_plan(input).assignment;
    TrialResult r;
    r.coverage = coverage(rec.labeled_world(), a);
    r.expert_coverage = rec.expert_coverage;
    e.mean_coverage += r.coverage;
    e.mean_relative_coverage += r.relative_coverage();
  }
  e.mean_coverage /= static_cast<double>(records.size());
  e.mean_relative_coverage /= static_cast<double>(records.size());
  return e;
}

const RegimeCurvePoint& RegimeReport::final_of(std::string_view name) const {
  for (const RegimeCurvePoint& p : finals) {
    if (p.regime == name) return p;
  }
  throw std::out_of_range("no regime result for " + std::string(name));
}

RegimeReport run_regimes(const RegimeSpec& spec) {
  if (spec.train.empty() || spec.eval.empty()) throw std::invalid_argument("regimes: empty train or eval set");
  const auto train = prediction_samples(spec.train, spec.local_history);
  const auto eval = prediction_samples(spec.eval, spec.local_history);
  const int last = spec.dmp_train.epochs;
  RegimeReport report;

  const auto needs_planner = [&] {
    for (DmpRegime r : spec.regimes) {
      if (r != DmpRegime::Joint) return true;
    }
    return false;
  }();
  if (needs_planner) {
    if (spec.pretrained_planner) {
      report.planner = *spec.pretrained_planner;
    } else {
      const auto tr = planning_samples(spec.train);
      const auto va = planning_samples(spec.validation);
      report.planner = train_imitation(tr, va, spec.planner_config, spec.planner_train).weights;
    }
  }

  for (DmpRegime regime : spec.regimes) {
    const std::string name(regime_name(regime));
    std::unique_ptr<D2CoPlanNet<float>> fixed_planner;
    if (regime == DmpRegime::Separate) fixed_planner = load_d2coplan(report.planner, spec.planner_config);
    const DmpEpochHook hook = [&](int epoch, DmpNet<float>& dmp, D2CoPlanNet<float>* planner) {
      const bool on_curve = spec.curve_every > 0 && epoch % spec.curve_every == 0;
      if (!on_curve && epoch != last) return;
      D2CoPlanNet<float>* p = planner ? planner : fixed_planner.get();
      const PredictedEval e = evaluate_predicted(dmp, p, spec.eval, eval);
      RegimeCurvePoint point{name, epoch, e.mean_coverage, e.mean_relative_coverage};
      report.curves.push_back(point);
      if (epoch == last) report.finals.push_back(point);
      if (epoch == last && regime == DmpRegime::Separate) {
        const PredictedEval dg = evaluate_predicted(dmp, nullptr, spec.eval, eval);
        report.finals.push_back({"separate+dg", epoch, dg.mean_coverage, dg.mean_relative_coverage});
      }
    };
    switch (regime) {
      case DmpRegime::Joint:
        train_joint(train, spec.planner_config, spec.dmp_config, spec.dmp_train, spec.planner_train.seed, hook);
        break;
      case DmpRegime::Separate:
        train_dmp_standalone(train, spec.dmp_config, spec.dmp_train, hook);
        break;
      case DmpRegime::FrozenDownstream:
        train_dmp_downstream(train, report.planner, spec.planner_config, spec.dmp_config, spec.dmp_train, hook);
        break;
    }
  }
  return report;
}

void write_regime_csv(const std::filesystem::path& path, const RegimeReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << "# " << kBenchSchema << "-regimes v" << kBenchSchemaVersion
      << "; one coverage curve per training regime; final rows include the DG baseline on standalone predictions\n";
  out << "kind,regime,epoch,mean_coverage,mean_relative_coverage\n" << std::setprecision(17);
  for (const RegimeCurvePoint& p : report.curves) {
    out << "curve," << p.regime << "," << p.epoch << "," << p.mean_coverage << "," << p.mean_relative_coverage << "\n";
  }
  for (const RegimeCurvePoint& p : report.finals) {
    out << "final," << p.regime << "," << p.epoch << "," << p.mean_coverage << "," << p.mean_relative_coverage << "\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace covplan
