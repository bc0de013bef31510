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
#include "covplan/run_config.hpp"

#include <sstream>

#include "covplan/scenario_io.hpp"

namespace covplan {
namespace {

using json = nlohmann::json;

void flatten(const json& j, const std::string& prefix, json& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else {
      out[key] = *it;
    }
  }
}

json parse_scalar(const std::string& key, const std::string& text, const json& like) {
  try {
    std::size_t used = 0;
    if (like.is_boolean()) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw std::invalid_argument("bool");
    }
    if (like.is_number_unsigned()) {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
      const unsigned long long v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } else if (like.is_number_integer()) {
      const long long v = std::stoll(text, &used);
      if (used == text.size()) return v;
    } else if (like.is_number_float()) {
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } else if (like.is_string()) {
      return text;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("cannot parse '" + text + "' for " + key);
}

// File values may be written as integers where the default is a float.
bool compatible(const json& value, const json& like) {
  if (like.is_number_float()) return value.is_number();
  if (like.is_number_unsigned()) return value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0);
  if (like.is_number_integer()) return value.is_number_integer();
  if (like.is_array()) {
    if (!value.is_array()) return false;
    const json elem = like.empty() ? json(0.0) : like.front();
    for (const json& v : value) {
      if (!(compatible(v, elem) || (like.empty() && (v.is_string() || v.is_number())))) return false;
    }
    return true;
  }
  return value.type() == like.type();
}

json parse_flag(const std::string& key, const std::string& text, const json& like) {
  if (!like.is_array()) return parse_scalar(key, text, like);
  // A JSON array literal is accepted as is; a bare comma list is parsed per item.
  if (!text.empty() && text.front() == '[') {
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded() || !compatible(parsed, like)) {
      throw ConfigError("cannot parse '" + text + "' for " + key);
    }
    return parsed;
  }
  // Element type from the default's first element; numeric lists default to float.
  const json elem = like.empty() ? json(0.0) : like.front();
  json out = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_scalar(key, item, elem));
  }
  return out;
}

template <typename T>
T get(const json& flat, const char* key) {
  return flat.at(key).get<T>();
}

void apply(RunConfig& c) {
  const json& f = c.values;
  c.world.grid_size = get<int>(f, "world.grid_size");
  c.world.sensing_range = get<int>(f, "world.sensing_range");
  c.world.step_distance = get<int>(f, "world.step_distance");
  c.world.comm_range = get<double>(f, "world.comm_range");
  c.world.fill_fraction = get<double>(f, "world.fill_fraction");
  c.world.target_speed = get<double>(f, "world.target_speed");
  c.robots = get<std::size_t>(f, "scenario.robots");
  c.seed = get<std::uint64_t>(f, "scenario.seed");
  c.count = get<std::size_t>(f, "data.count");
  c.fractions = {get<double>(f, "data.train_fraction"), get<double>(f, "data.validation_fraction"),
                 get<double>(f, "data.test_fraction")};
  c.jobs = get<std::size_t>(f, "run.jobs");

  c.planner.grid_size = c.world.grid_size;
  c.planner.encoder_channels = get<std::vector<std::size_t>>(f, "planner.encoder_channels");
  c.planner.kernel = get<std::size_t>(f, "planner.kernel");
  c.planner.same_padding = get<bool>(f, "planner.same_padding");
  c.planner.gnn_widths = get<std::vector<std::size_t>>(f, "planner.gnn_widths");
  c.planner.hops = get<std::size_t>(f, "planner.hops");
  c.planner.dropout = get<double>(f, "planner.dropout");
  c.train.epochs = get<int>(f, "train.epochs");
  c.train.batch_instances = get<std::size_t>(f, "train.batch_instances");
  c.train.learning_rate = get<double>(f, "train.learning_rate");
  c.train.seed = get<std::uint64_t>(f, "train.seed");

  c.dmp.grid_size = c.world.grid_size;
  c.dmp.channels = get<std::vector<std::size_t>>(f, "dmp.channels");
  c.dmp.kernel = get<std::size_t>(f, "dmp.kernel");
  c.dmp.class_weights = {get<double>(f, "dmp.class_weight_free"), get<double>(f, "dmp.class_weight_occupied")};
  c.local_history = get<bool>(f, "dmp.local_history");
  c.dmp_train.epochs = get<int>(f, "dmp_train.epochs");
  c.dmp_train.batch_instances = get<std::size_t>(f, "dmp_train.batch_instances");
  c.dmp_train.learning_rate = get<double>(f, "dmp_train.learning_rate");
  c.dmp_train.seed = get<std::uint64_t>(f, "dmp_train.seed");
  c.regime = parse_regime(get<std::string>(f, "dmp_train.regime"));

  c.bench.trials = get<std::size_t>(f, "bench.trials");
  c.bench.planners = get<std::vector<std::string>>(f, "bench.planners");
  c.bench.variable = get<std::string>(f, "bench.variable");
  c.bench.values = get<std::vector<double>>(f, "bench.values");
  c.bench.warmup = get<std::size_t>(f, "bench.warmup");
  c.bench.serial_timing = get<bool>(f, "bench.serial_timing");
  c.bench.curve_every = get<int>(f, "bench.curve_every");

  c.world.validate();
  c.fractions.validate();
  c.planner.validate();
  c.dmp.validate();
}

}  // namespace

std::string_view source_name(ConfigSource s) {
  switch (s) {
    case ConfigSource::Default: return "default";
    case ConfigSource::File: return "file";
    case ConfigSource::Flag: return "flag";
  }
  return "?";
}

json profile_defaults(std::string_view profile) {
  WorldParams w;
  D2CoPlanConfig p;
  if (profile == "desk") {
    w = WorldParams::desk();
    p = D2CoPlanConfig::desk();
  } else if (profile == "paper") {
    w = WorldParams::paper();
    p = D2CoPlanConfig::paper();
  } else {
    throw ConfigError("unknown profile '" + std::string(profile) + "' (expected desk or paper)");
  }
  const bool paper = profile == "paper";
  const TrainConfig t;
  const DmpConfig d;
  // Integer-valued physical parameters stay ints; counts are unsigned.
  return {
      {"world", w},
      {"scenario", {{"robots", std::size_t{paper ? 20u : 6u}}, {"seed", std::uint64_t{1}}}},
      {"data", {{"count", std::size_t{paper ? 40000u : 6667u}},
                {"train_fraction", 0.6},
                {"validation_fraction", 0.2},
                {"test_fraction", 0.2}}},
      {"planner", {{"encoder_channels", p.encoder_channels},
                   {"kernel", p.kernel},
                   {"same_padding", p.same_padding},
                   {"gnn_widths", p.gnn_widths},
                   {"hops", p.hops},
                   {"dropout", p.dropout}}},
      {"train", {{"epochs", paper ? t.epochs : 20},
                 {"batch_instances", t.batch_instances},
                 {"learning_rate", t.learning_rate},
                 {"seed", t.seed}}},
      {"dmp", {{"channels", d.channels},
               {"kernel", d.kernel},
               {"class_weight_free", d.class_weights.free},
               {"class_weight_occupied", d.class_weights.occupied},
               {"local_history", true}}},
      {"dmp_train", {{"epochs", paper ? 2000 : 60},
                     {"batch_instances", std::size_t{4}},
                     {"learning_rate", 1e-3},
                     {"seed", std::uint64_t{1}},
                     {"regime", "frozen-downstream"}}},
      {"bench", {{"trials", std::size_t{paper ? 1000u : 200u}},
                 {"planners", std::vector<std::string>{"expert", "dg", "random"}},
                 {"variable", "none"},
                 {"values", std::vector<double>{}},
                 {"warmup", std::size_t{2}},
                 {"serial_timing", false},
                 {"curve_every", 0}}},
      {"run", {{"jobs", std::size_t{0}}}},
  };
}

nlohmann::json RunConfig::resolved_json() const {
  json out = json::object();
  for (auto it = values.begin(); it != values.end(); ++it) {
    out[it.key()] = {{"value", *it}, {"source", source_name(provenance.at(it.key()))}};
  }
  out["profile"] = {{"value", profile}, {"source", source_name(provenance.at("profile"))}};
  return out;
}

RunConfig resolve_config(std::optional<std::string> profile, const std::optional<std::filesystem::path>& file,
                         const std::vector<std::pair<std::string, std::string>>& flags) {
  json file_flat = json::object();
  std::optional<std::string> file_profile;
  if (file) {
    json parsed;
    try {
      parsed = json::parse(read_text_file(*file));
    } catch (const json::exception& e) {
      throw ConfigError(file->string() + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    if (!parsed.is_object()) throw ConfigError(file->string() + ": top level must be an object");
    if (parsed.contains("profile")) {
      if (!parsed["profile"].is_string()) throw ConfigError(file->string() + ": profile must be a string");
      file_profile = parsed["profile"].get<std::string>();
      parsed.erase("profile");
    }
    flatten(parsed, "", file_flat);
  }
  if (profile && file_profile && *profile != *file_profile) {
    throw ConfigError("config conflict: --profile " + *profile + " but the config file says " + *file_profile);
  }

  RunConfig c;
  ConfigSource profile_source = ConfigSource::Default;
  if (profile) {
    c.profile = *profile;
    profile_source = ConfigSource::Flag;
  } else if (file_profile) {
    c.profile = *file_profile;
    profile_source = ConfigSource::File;
  }
  c.provenance["profile"] = profile_source;
  flatten(profile_defaults(c.profile), "", c.values);
  for (auto it = c.values.begin(); it != c.values.end(); ++it) c.provenance[it.key()] = ConfigSource::Default;

  for (auto it = file_flat.begin(); it != file_flat.end(); ++it) {
    if (!c.values.contains(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
    if (!compatible(*it, c.values[it.key()])) {
      throw ConfigError("wrong type for config key '" + it.key() + "': " + it->dump());
    }
    c.values[it.key()] = *it;
    c.provenance[it.key()] = ConfigSource::File;
  }
  for (const auto& [key, text] : flags) {
    if (!c.values.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    c.values[key] = parse_flag(key, text, c.values[key]);
    c.provenance[key] = ConfigSource::Flag;
  }
  try {
    apply(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

}  // namespace covplan
