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
#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "covplan/bench.hpp"
#include "covplan/checksum.hpp"
#include "covplan/datagen.hpp"
#include "covplan/dmp.hpp"
#include "covplan/grad_suite.hpp"
#include "covplan/objective.hpp"
#include "covplan/registry.hpp"
#include "covplan/run_config.hpp"
#include "covplan/scenario_io.hpp"

namespace covplan::cli {
namespace {

namespace fs = std::filesystem;
using Flags = std::vector<std::pair<std::string, std::string>>;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string profile;
  std::vector<std::string> sets;
  std::string out;
  Flags flags;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--profile", c.profile, "Named defaults: desk or paper");
  sub->add_option("--set", c.sets, "Override any config key: key=value (repeatable)");
  sub->add_option_function<std::string>("--seed", [&c](const std::string& v) { c.flags.push_back({"scenario.seed", v}); },
                                        "Scenario seed");
  sub->add_option_function<std::string>("--jobs", [&c](const std::string& v) { c.flags.push_back({"run.jobs", v}); },
                                        "Worker threads (0 = all cores, 1 = serial)");
}

void add_mapped(CLI::App* sub, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(flag, [&c, key](const std::string& v) { c.flags.push_back({key, v}); }, help);
}

RunConfig resolve(const Common& c) {
  Flags flags;
  for (const std::string& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
    flags.push_back({s.substr(0, eq), s.substr(eq + 1)});
  }
  // Dedicated flags come after --set so they win on the same key.
  flags.insert(flags.end(), c.flags.begin(), c.flags.end());
  std::optional<std::string> profile;
  if (!c.profile.empty()) profile = c.profile;
  std::optional<fs::path> file;
  if (!c.config.empty()) file = c.config;
  return resolve_config(profile, file, flags);
}

void write_run_log(const fs::path& dir, const std::string& command, const RunConfig& cfg) {
  fs::create_directories(dir);
  write_text_file(dir / "resolved_config.json",
                  nlohmann::json{{"command", command}, {"config", cfg.resolved_json()}}.dump(2) + "\n");
}

// Dataset parameters override the config; an explicit setting that disagrees
// is a conflict.
void adopt_dataset(RunConfig& cfg, const DatasetManifest& m) {
  const nlohmann::json ds = m.spec.params;
  for (auto it = ds.begin(); it != ds.end(); ++it) {
    const std::string key = "world." + it.key();
    if (cfg.provenance.at(key) != ConfigSource::Default && cfg.values.at(key) != *it) {
      throw ConfigError("config conflict: " + key + "=" + cfg.values.at(key).dump() + " but the dataset has " +
                        it->dump());
    }
  }
  cfg.world = m.spec.params;
  cfg.planner.grid_size = cfg.world.grid_size;
  cfg.dmp.grid_size = cfg.world.grid_size;
}

std::span<const EpisodeRecord> pick_split(const Dataset& d, const std::string& split) {
  if (split == "all") return d.records;
  if (split == "train") return d.train();
  if (split == "validation") return d.validation();
  if (split == "test") return d.test();
  throw UsageError("unknown split '" + split + "' (all, train, validation, test)");
}

// "--out x.csv" names the file; any other value is a run directory.
std::pair<fs::path, fs::path> csv_target(const std::string& out, const std::string& default_name) {
  const fs::path p(out);
  if (p.extension() == ".csv") return {p.has_parent_path() ? p.parent_path() : fs::path("."), p};
  return {p, p / default_name};
}

void require_planner_name(const std::string& name) {
  for (const std::string& n : planner_names()) {
    if (n == name) return;
  }
  throw UsageError("unknown planner '" + name + "'");
}

void require_weights(const std::string& planner, const std::string& weights) {
  if (planner == "d2coplan" && weights.empty()) throw UsageError("planner d2coplan needs --weights");
}

nn::WeightStore load_weights(const std::string& stem, const char* what) {
  if (stem.empty()) throw UsageError(std::string(what) + " weights required");
  return nn::WeightStore::load(stem);
}

int cmd_gen_data(const Common& c, std::ostream& out) {
  RunConfig cfg = resolve(c);
  const ScenarioSpec spec = cfg.scenario();
  const DatasetManifest m = generate_dataset(c.out, cfg.count, spec, cfg.fractions, cfg.jobs);
  out << "dataset " << c.out << ": " << m.count << " records (train " << m.splits.train << ", validation "
      << m.splits.validation << ", test " << m.splits.test << "), checksum " << m.checksum << "\n";
  return kOk;
}

int cmd_train_planner(const Common& c, const std::string& dataset, std::ostream& out) {
  RunConfig cfg = resolve(c);
  const Dataset d = load_dataset(dataset);
  adopt_dataset(cfg, d.manifest);
  write_run_log(c.out, "train-planner", cfg);
  const auto train = planning_samples(d.train());
  const auto val = planning_samples(d.validation());
  const TrainResult r = train_imitation(train, val, cfg.planner, cfg.train);
  r.weights.save(fs::path(c.out) / "planner");
  write_training_log(fs::path(c.out) / "training_log.csv", r.log);
  out << "planner: best_epoch=" << r.best_epoch << " val_loss=" << r.best_val_loss
      << " val_accuracy=" << r.best_val_accuracy << " weights=" << (fs::path(c.out) / "planner").string() << "\n";
  return kOk;
}

int cmd_train_dmp(const Common& c, const std::string& dataset, const std::string& planner_weights,
                  std::ostream& out) {
  RunConfig cfg = resolve(c);
  const Dataset d = load_dataset(dataset);
  adopt_dataset(cfg, d.manifest);
  write_run_log(c.out, "train-dmp", cfg);
  const auto train = prediction_samples(d.train(), cfg.local_history);
  DmpTrainResult r;
  switch (cfg.regime) {
    case DmpRegime::Separate:
      r = train_dmp_standalone(train, cfg.dmp, cfg.dmp_train);
      break;
    case DmpRegime::FrozenDownstream:
      r = train_dmp_downstream(train, load_weights(planner_weights, "--planner-weights: frozen-downstream planner"),
                               cfg.planner, cfg.dmp, cfg.dmp_train);
      break;
    case DmpRegime::Joint:
      r = train_joint(train, cfg.planner, cfg.dmp, cfg.dmp_train, cfg.train.seed);
      r.planner.save(fs::path(c.out) / "planner");
      break;
  }
  r.dmp.save(fs::path(c.out) / "dmp");
  write_training_log(fs::path(c.out) / "training_log.csv", r.log);
  out << "dmp (" << regime_name(cfg.regime) << "): final_loss=" << r.log.back().train_loss
      << " weights=" << (fs::path(c.out) / "dmp").string() << "\n";
  return kOk;
}

int cmd_eval(const Common& c, const std::string& planner_name, const std::string& dataset, const std::string& weights,
             const std::string& dmp_weights, const std::string& split, std::ostream& out) {
  require_planner_name(planner_name);
  require_weights(planner_name, weights);
  RunConfig cfg = resolve(c);
  const Dataset d = load_dataset(dataset);
  adopt_dataset(cfg, d.manifest);
  PlannerOptions opts;
  opts.d2coplan_config = cfg.planner;
  if (!weights.empty()) opts.d2coplan_weights = nn::WeightStore::load(weights);
  check_planner(planner_name, opts);
  std::unique_ptr<DmpNet<float>> dmp;
  if (!dmp_weights.empty()) dmp = load_dmp(nn::WeightStore::load(dmp_weights), cfg.dmp);
  const auto records = pick_split(d, split);
  const auto [dir, csv] = csv_target(c.out, "eval.csv");
  write_run_log(dir, "eval", cfg);

  std::vector<TrialResult> rows;
  for (const EpisodeRecord& rec : records) {
    PlannerInput input = rec.planner_input();
    if (dmp) {
      input.local_maps = predicted_local_maps(*dmp, prediction_sample(rec, cfg.local_history), rec.windows);
      input.global_map.reset();
    }
    auto planner = make_planner(planner_name, opts, derive_seed(rec.seed, 0x52414e44));
    const PlanResult plan = planner->plan(input);
    TrialResult r;
    r.variable = "none";
    r.planner = planner_name;
    r.trial = rec.index;
    r.trial_seed = rec.seed;
    r.robots = rec.robots.size();
    r.fill_fraction = rec.params.fill_fraction;
    r.coverage = coverage(rec.labeled_world(), plan.assignment);
    r.expert_coverage = rec.expert_coverage;
    r.decision_latency = plan.decision_latency();
    r.total_latency = plan.total_latency;
    rows.push_back(r);
  }
  write_csv(csv, rows);
  const auto agg = aggregate(rows);
  out << "eval " << planner_name << ": " << rows.size() << " rows, mean_relative_coverage="
      << (agg.empty() ? 0.0 : agg.front().mean_relative_coverage) << " csv=" << csv.string() << "\n";
  return kOk;
}

SweepSpec sweep_from(const RunConfig& cfg) {
  SweepSpec s;
  s.variable = parse_variable(cfg.bench.variable);
  s.values = cfg.bench.values;
  s.trials = cfg.bench.trials;
  s.planners = cfg.bench.planners;
  s.seed = cfg.seed;
  s.params = cfg.world;
  s.robots = cfg.robots;
  s.jobs = cfg.jobs;
  s.warmup = cfg.bench.warmup;
  s.serial_timing = cfg.bench.serial_timing;
  return s;
}

PlannerOptions bench_options(const RunConfig& cfg, const std::string& weights, bool random_weights) {
  PlannerOptions opts;
  opts.d2coplan_config = cfg.planner;
  if (!weights.empty()) {
    opts.d2coplan_weights = nn::WeightStore::load(weights);
  } else if (random_weights) {
    D2CoPlanNet<float> net(cfg.planner, cfg.train.seed);
    opts.d2coplan_weights = nn::capture(net.params(), net.architecture(), cfg.train.seed);
  }
  return opts;
}

// Greedy 1/2 bound whenever both planners ran on the same instances.
void check_greedy_bound(const std::vector<TrialResult>& rows) {
  std::map<std::pair<double, std::size_t>, std::pair<int, int>> pairs;  // expert, brute
  bool have_brute = false;
  for (const TrialResult& r : rows) {
    if (r.planner == "expert") pairs[{r.value, r.trial}].first = r.coverage;
    if (r.planner == "bruteforce") {
      pairs[{r.value, r.trial}].second = r.coverage;
      have_brute = true;
    }
  }
  if (!have_brute) return;
  for (const auto& [key, cov] : pairs) {
    if (2 * cov.first < cov.second) {
      throw AssertionFailure("greedy bound violated on trial " + std::to_string(key.second) + ": expert " +
                             std::to_string(cov.first) + " < 0.5 x bruteforce " + std::to_string(cov.second));
    }
  }
}

int cmd_bench(const Common& c, const std::string& mode, const std::string& weights, bool random_weights,
              const std::string& dataset, const std::string& planner_weights, std::ostream& out) {
  RunConfig cfg = resolve(c);
  const auto [dir, csv] = csv_target(c.out, "results.csv");
  if (mode == "regimes") {
    if (dataset.empty()) throw UsageError("bench regimes needs --dataset");
    const Dataset d = load_dataset(dataset);
    adopt_dataset(cfg, d.manifest);
    write_run_log(dir, "bench regimes", cfg);
    RegimeSpec spec;
    spec.train = d.train();
    spec.validation = d.validation();
    spec.eval = d.test();
    if (cfg.bench.trials < spec.eval.size()) spec.eval = spec.eval.subspan(0, cfg.bench.trials);
    spec.planner_config = cfg.planner;
    spec.planner_train = cfg.train;
    spec.dmp_config = cfg.dmp;
    spec.dmp_train = cfg.dmp_train;
    spec.curve_every = cfg.bench.curve_every;
    spec.local_history = cfg.local_history;
    if (!planner_weights.empty()) spec.pretrained_planner = nn::WeightStore::load(planner_weights);
    const RegimeReport report = run_regimes(spec);
    write_regime_csv(csv, report);
    for (const RegimeCurvePoint& p : report.finals) {
      out << "regime " << p.regime << ": mean_coverage=" << p.mean_coverage
          << " mean_relative_coverage=" << p.mean_relative_coverage << "\n";
    }
    return kOk;
  }

  SweepSpec spec = sweep_from(cfg);
  if (mode == "compare") {
    spec.variable = SweepVariable::None;
  } else if (mode == "sweep") {
    if (spec.variable == SweepVariable::None) throw UsageError("bench sweep needs --variable robots|density");
  } else if (mode == "scaling") {
    spec.variable = SweepVariable::RobotCount;
    spec.serial_timing = true;
  } else {
    throw UsageError("unknown bench mode '" + mode + "' (compare, sweep, scaling, regimes)");
  }
  for (const std::string& p : spec.planners) {
    require_planner_name(p);
    if (!random_weights) require_weights(p, weights);
  }
  const PlannerOptions opts = bench_options(cfg, weights, random_weights);
  write_run_log(dir, "bench " + mode, cfg);
  std::vector<TrialResult> rows;
  if (mode == "scaling") {
    std::vector<std::size_t> counts;
    for (double v : spec.values) counts.push_back(static_cast<std::size_t>(v));
    rows = measure_scaling(counts, spec.planners, spec.trials, spec.params, spec.seed, opts, spec.warmup);
  } else {
    rows = run_trials(spec, opts);
  }
  write_csv(csv, rows);
  for (const Aggregate& a : aggregate(rows)) {
    out << "bench " << a.planner << " " << a.variable << "=" << a.value << ": relative_coverage="
        << a.mean_relative_coverage << " +/- " << a.stderr_relative_coverage << " latency=" << a.mean_latency
        << "s\n";
  }
  check_greedy_bound(rows);
  return kOk;
}

int cmd_grad_check(const Common& c, std::ostream& out) {
  RunConfig cfg = resolve(c);
  const auto entries = run_grad_suite();
  nlohmann::json report = nlohmann::json::array();
  for (const auto& e : entries) {
    out << e.name << ": " << e.report.summary() << "\n";
    report.push_back({{"name", e.name},
                      {"checked", e.report.checked},
                      {"kinks_excluded", e.report.kinks_excluded},
                      {"max_rel_error", e.report.max_rel_error},
                      {"passed", e.report.passed()}});
  }
  const bool ok = all_passed(entries);
  out << "grad-check: max_rel_err=" << max_rel_error(entries) << (ok ? " PASS" : " FAIL") << "\n";
  if (!c.out.empty()) {
    write_run_log(c.out, "grad-check", cfg);
    write_text_file(fs::path(c.out) / "grad_check.json", report.dump(2) + "\n");
  }
  if (!ok) throw AssertionFailure("gradient check exceeded tolerance");
  return kOk;
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-robot coverage planning toolkit", "covplan"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  std::string dataset, weights, dmp_weights, planner_weights, planner_name, split = "all";
  bool random_weights = false;

  auto* gen = app.add_subcommand("gen-data", "Generate a labelled scenario dataset");
  add_common(gen, common);
  add_mapped(gen, common, "--count", "data.count", "Number of records");
  add_mapped(gen, common, "--grid", "world.grid_size", "Grid side G");
  add_mapped(gen, common, "--robots", "scenario.robots", "Robots per scenario");
  add_mapped(gen, common, "--fill", "world.fill_fraction", "Fraction of cells holding a target");
  gen->add_option("--out", common.out, "Dataset directory")->required();

  auto* tp = app.add_subcommand("train-planner", "Imitation-train the decentralized planner");
  add_common(tp, common);
  tp->add_option("--dataset", dataset, "Dataset directory")->required();
  add_mapped(tp, common, "--epochs", "train.epochs", "Training epochs");
  tp->add_option("--out", common.out, "Run directory")->required();

  auto* td = app.add_subcommand("train-dmp", "Train the map predictor");
  add_common(td, common);
  td->add_option("--dataset", dataset, "Dataset directory")->required();
  add_mapped(td, common, "--dmp-regime", "dmp_train.regime", "joint | separate | frozen-downstream");
  add_mapped(td, common, "--epochs", "dmp_train.epochs", "Training epochs");
  td->add_option("--planner-weights", planner_weights, "Frozen planner weights (frozen-downstream)");
  td->add_option("--out", common.out, "Run directory")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a planner on dataset records");
  add_common(ev, common);
  ev->add_option("--planner", planner_name, "expert | bruteforce | dg | random | d2coplan")->required();
  ev->add_option("--dataset", dataset, "Dataset directory")->required();
  ev->add_option("--weights", weights, "Planner weights stem (d2coplan)");
  ev->add_option("--dmp-weights", dmp_weights, "Plan on predicted maps from these predictor weights");
  ev->add_option("--split", split, "all | train | validation | test");
  ev->add_option("--out", common.out, "Run directory or .csv path")->required();

  auto* bench = app.add_subcommand("bench", "Monte-Carlo benchmarks");
  bench->require_subcommand(1);
  std::string bench_mode;
  for (const char* mode : {"compare", "sweep", "scaling", "regimes"}) {
    auto* b = bench->add_subcommand(mode);
    add_common(b, common);
    add_mapped(b, common, "--trials", "bench.trials", "Paired trials per value");
    add_mapped(b, common, "--planners", "bench.planners", "Comma-separated planner list");
    add_mapped(b, common, "--grid", "world.grid_size", "Grid side G");
    add_mapped(b, common, "--robots", "scenario.robots", "Robots per scenario");
    add_mapped(b, common, "--fill", "world.fill_fraction", "Fraction of cells holding a target");
    add_mapped(b, common, "--warmup", "bench.warmup", "Discarded warm-up trials");
    b->add_flag_function("--serial-timing", [&common](std::int64_t) { common.flags.push_back({"bench.serial_timing", "true"}); },
                         "Run trials serially for clean latency numbers");
    b->add_option("--weights", weights, "d2coplan weights stem");
    b->add_option("--out", common.out, "Results .csv path or run directory")->required();
    b->callback([&bench_mode, mode] { bench_mode = mode; });
    if (std::string(mode) == "sweep") {
      add_mapped(b, common, "--variable", "bench.variable", "robots | density");
      add_mapped(b, common, "--values", "bench.values", "Comma-separated values");
    }
    if (std::string(mode) == "scaling") {
      add_mapped(b, common, "--counts", "bench.values", "Ascending robot counts");
      b->add_flag("--random-weights", random_weights, "Time d2coplan with seeded untrained weights");
    }
    if (std::string(mode) == "regimes") {
      b->add_option("--dataset", dataset, "Dataset directory")->required();
      b->add_option("--planner-weights", planner_weights, "Reuse a ground-truth-trained planner");
      add_mapped(b, common, "--epochs", "dmp_train.epochs", "Predictor epochs per regime");
      add_mapped(b, common, "--curve-every", "bench.curve_every", "Evaluate every n epochs");
    }
  }

  auto* gc = app.add_subcommand("grad-check", "Finite-difference gradient checks");
  add_common(gc, common);
  gc->add_option("--out", common.out, "Optional run directory for the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: code=usage message=" << one_line(e.what()) << "\n";
    return kUsageError;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common, out);
    if (tp->parsed()) return cmd_train_planner(common, dataset, out);
    if (td->parsed()) return cmd_train_dmp(common, dataset, planner_weights, out);
    if (ev->parsed()) return cmd_eval(common, planner_name, dataset, weights, dmp_weights, split, out);
    if (bench->parsed()) return cmd_bench(common, bench_mode, weights, random_weights, dataset, planner_weights, out);
    if (gc->parsed()) return cmd_grad_check(common, out);
  } catch (const UsageError& e) {
    err << "error: code=usage message=" << one_line(e.what()) << "\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: code=usage message=" << one_line(e.what()) << "\n";
    return kUsageError;
  } catch (const AssertionFailure& e) {
    err << "error: code=assertion message=" << one_line(e.what()) << "\n";
    return kAssertionFailed;
  } catch (const std::exception& e) {
    err << "error: code=runtime message=" << one_line(e.what()) << "\n";
    return kRuntimeError;
  }
  err << "error: code=usage message=no subcommand\n";
  return kUsageError;
}

}  // namespace covplan::cli
