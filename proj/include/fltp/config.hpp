/*
 * Copyright 2026 The fltp-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment configuration: a flat `key = value` text format with `#`
// comments. List-valued keys take comma-separated values. See
// configs/README.md for the key reference.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fltp/attack_injection.hpp"
#include "fltp/errors.hpp"
#include "fltp/federated.hpp"
#include "fltp/feature_pipeline.hpp"
#include "fltp/trace_model.hpp"

namespace fltp {

enum class Method { FlTp, FedAvg, Centralized };

constexpr std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::FlTp: return "fl-tp";
    case Method::FedAvg: return "fed-avg";
    case Method::Centralized: return "centralized";
  }
  return "unknown";
}

enum class Profile { Paper, Desk };

struct ModelConfig {
  std::size_t hidden_size = 64;
  double learning_rate = 1e-5;
  double momentum = 0.5;
  std::size_t batch_size = 128;
  int local_episodes = 10;
  int global_rounds = 300;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ExperimentConfig {
  ScenarioConfig scenario;  // n_vehicles, penetration and rng_seed are set per run
  int holdout_steps = 20;
  AttackParams attack;
  double rssi_min = -100.0;
  double rssi_max = -40.0;
  ModelConfig model;
  GateConfig gate;
  InfluenceTable xi;
  std::vector<Method> methods = {Method::FlTp, Method::FedAvg, Method::Centralized};
  std::vector<double> penetrations = {0.25, 0.5, 0.75};
  std::vector<int> vehicle_counts = {4, 10, 20};
  int repeats = 50;
  std::uint64_t master_seed = 1;
  std::string output_dir = "results";
  int threads = 1;
  bool record_wallclock = false;
  int checkpoint_every = 0;  // 0: final round only

  NormalizationSpec normalization() const {
    return {scenario.region_side, scenario.v_max, rssi_min, rssi_max};
  }

  TrainOptions train_options() const {
    return {model.local_episodes, model.batch_size, {model.learning_rate, model.momentum}};
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Full-scale defaults, with scenario length chosen for this simulator.
inline ExperimentConfig paper_profile() {
  ExperimentConfig c;
  c.scenario.n_steps = 200;
  c.holdout_steps = 40;
  c.attack = AttackParams::for_region(c.scenario.region_side, c.scenario.v_max);
  return c;
}

/// Laptop-scale profile: one traffic scenario, 30 rounds, 2 repeats, and a
/// smaller, faster-learning network so that 30 rounds show a trend.
inline ExperimentConfig desk_profile() {
  ExperimentConfig c = paper_profile();
  c.vehicle_counts = {4};
  c.penetrations = {0.5};
  c.model.global_rounds = 30;
  c.repeats = 2;
  c.model.hidden_size = 16;
  c.model.learning_rate = 0.1;
  c.model.batch_size = 16;
  c.scenario.n_steps = 120;
  c.holdout_steps = 30;
  return c;
}

inline ExperimentConfig profile_defaults(Profile p) { return p == Profile::Desk ? desk_profile() : paper_profile(); }

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "cannot parse '" + text + "'");
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

inline Method parse_method(const std::string& key, const std::string& text) {
  for (Method m : {Method::FlTp, Method::FedAvg, Method::Centralized}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError(key, "unknown method '" + text + "'");
}

inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline const std::map<std::string, AttackerType>& xi_keys() {
  static const std::map<std::string, AttackerType> keys = {
      {"xi.constant", AttackerType::Constant},
      {"xi.constant_offset", AttackerType::ConstantOffset},
      {"xi.random", AttackerType::Random},
      {"xi.random_offset", AttackerType::RandomOffset},
      {"xi.eventual_stop", AttackerType::EventualStop},
  };
  return keys;
}

}  // namespace detail

/// Checks every invariant; errors name the offending key.
inline void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
  };
  require(!c.vehicle_counts.empty(), "n_vehicles", "needs at least one value");
  for (int n : c.vehicle_counts) require(n >= 2, "n_vehicles", "must be >= 2");
  require(!c.penetrations.empty(), "penetration", "needs at least one value");
  for (double p : c.penetrations) require(p >= 0.0 && p <= 1.0, "penetration", "must lie in [0, 1]");
  require(c.scenario.region_side > 0.0, "region_side", "must be positive");
  require(c.scenario.dt > 0.0, "dt", "must be positive");
  require(c.scenario.v_max > 0.0, "v_max", "must be positive");
  require(c.scenario.accel_sigma >= 0.0, "accel_sigma", "must be >= 0");
  require(c.holdout_steps >= static_cast<int>(kWindowSpan), "holdout_steps", "must be >= 15");
  require(c.scenario.n_steps - c.holdout_steps >= static_cast<int>(kWindowSpan), "n_steps",
          "must leave at least 15 training steps before the hold-out split");
  require(c.scenario.channel.reference_distance > 0.0, "reference_distance", "must be positive");
  require(c.scenario.channel.noise_sigma >= 0.0, "rssi_noise_sigma", "must be >= 0");
  require(c.scenario.channel.message_speed > 0.0, "message_speed", "must be positive");
  require(c.rssi_min < c.rssi_max, "rssi_max", "must exceed rssi_min");
  require(c.attack.random_offset_range >= 0.0, "attack.random_offset_range", "must be >= 0");
  require(c.attack.p_freeze >= 0.0 && c.attack.p_freeze <= 1.0, "attack.stop_probability", "must lie in [0, 1]");
  require(c.attack.fixed_point.x >= 0.0 && c.attack.fixed_point.x <= c.scenario.region_side, "attack.fixed_x",
          "must lie in [0, region_side]");
  require(c.attack.fixed_point.y >= 0.0 && c.attack.fixed_point.y <= c.scenario.region_side, "attack.fixed_y",
          "must lie in [0, region_side]");
  require(c.model.hidden_size >= 1, "hidden_size", "must be >= 1");
  require(c.model.learning_rate >= 0.0, "learning_rate", "must be >= 0");
  require(c.model.momentum >= 0.0 && c.model.momentum < 1.0, "momentum", "must lie in [0, 1)");
  require(c.model.batch_size >= 1, "batch_size", "must be >= 1");
  require(c.model.local_episodes >= 0, "local_episodes", "must be >= 0");
  require(c.model.global_rounds >= 1, "global_rounds", "must be >= 1");
  require(c.gate.gamma >= 0.0 && c.gate.gamma <= 1.0, "gamma", "must lie in [0, 1]");
  for (const auto& [key, type] : detail::xi_keys()) require(c.xi[type] >= 0.0, key.c_str(), "must be >= 0");
  require(!c.methods.empty(), "methods", "needs at least one method");
  require(c.repeats >= 1, "repeats", "must be >= 1");
  require(c.threads >= 1, "threads", "must be >= 1");
  require(c.checkpoint_every >= 0, "checkpoint_every", "must be >= 0");
}

/// Parses key/value text over the given base (profile defaults).
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = paper_profile()) {
  ExperimentConfig c = std::move(base);
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(text, "line " + std::to_string(line_no) + " is not of the form key = value");
    }
    const auto key = detail::trim(std::string_view(text).substr(0, eq));
    const auto value = detail::trim(std::string_view(text).substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    using detail::parse_number;
    auto num = [&](auto& field) { field = parse_number<std::remove_reference_t<decltype(field)>>(key, value); };

    if (key == "n_vehicles") {
      c.vehicle_counts.clear();
      for (const auto& v : detail::split_list(value)) c.vehicle_counts.push_back(parse_number<int>(key, v));
    } else if (key == "penetration") {
      c.penetrations.clear();
      for (const auto& v : detail::split_list(value)) c.penetrations.push_back(parse_number<double>(key, v));
    } else if (key == "methods") {
      c.methods.clear();
      for (const auto& v : detail::split_list(value)) c.methods.push_back(detail::parse_method(key, v));
    } else if (key == "region_side") num(c.scenario.region_side);
    else if (key == "dt") num(c.scenario.dt);
    else if (key == "n_steps") num(c.scenario.n_steps);
    else if (key == "holdout_steps") num(c.holdout_steps);
    else if (key == "v_max") num(c.scenario.v_max);
    else if (key == "accel_sigma") num(c.scenario.accel_sigma);
    else if (key == "tx_power_dbm") num(c.scenario.channel.tx_power_dbm);
    else if (key == "path_loss_exponent") num(c.scenario.channel.path_loss_exponent);
    else if (key == "reference_distance") num(c.scenario.channel.reference_distance);
    else if (key == "rssi_noise_sigma") num(c.scenario.channel.noise_sigma);
    else if (key == "message_speed") num(c.scenario.channel.message_speed);
    else if (key == "rssi_min") num(c.rssi_min);
    else if (key == "rssi_max") num(c.rssi_max);
    else if (key == "attack.fixed_x") num(c.attack.fixed_point.x);
    else if (key == "attack.fixed_y") num(c.attack.fixed_point.y);
    else if (key == "attack.offset_x") num(c.attack.fixed_offset.x);
    else if (key == "attack.offset_y") num(c.attack.fixed_offset.y);
    else if (key == "attack.random_offset_range") num(c.attack.random_offset_range);
    else if (key == "attack.stop_probability") num(c.attack.p_freeze);
    else if (key == "hidden_size") num(c.model.hidden_size);
    else if (key == "learning_rate") num(c.model.learning_rate);
    else if (key == "momentum") num(c.model.momentum);
    else if (key == "batch_size") num(c.model.batch_size);
    else if (key == "local_episodes") num(c.model.local_episodes);
    else if (key == "global_rounds") num(c.model.global_rounds);
    else if (key == "gate") {
      if (value == "accuracy") c.gate.strategy = GateStrategy::AccuracyGate;
      else if (value == "random") c.gate.strategy = GateStrategy::RandomGate;
      else throw ConfigError(key, "expected accuracy or random");
    } else if (key == "gamma") num(c.gate.gamma);
    else if (detail::xi_keys().contains(key)) num(c.xi[detail::xi_keys().at(key)]);
    else if (key == "repeats") num(c.repeats);
    else if (key == "seed") num(c.master_seed);
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "threads") num(c.threads);
    else if (key == "record_wallclock") c.record_wallclock = detail::parse_bool(key, value);
    else if (key == "checkpoint_every") num(c.checkpoint_every);
    else throw ConfigError(key, "unknown key");
  }

  // Derived attack fields follow the scenario unless set explicitly.
  c.attack.region_side = c.scenario.region_side;
  c.attack.v_max = c.scenario.v_max;
  if (!seen.contains("attack.fixed_x")) c.attack.fixed_point.x = c.scenario.region_side / 2.0;
  if (!seen.contains("attack.fixed_y")) c.attack.fixed_point.y = c.scenario.region_side / 2.0;
  c.attack.p_truthful = 1.0 - c.attack.p_freeze;
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path, Profile profile = Profile::Paper) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  return parse_config(in, profile_defaults(profile));
}

/// Writes every key; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& c) {
  using detail::format_number;
  std::ostringstream out;
  auto list = [](const auto& values, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + fmt(values[i]);
    return s;
  };
  out << "n_vehicles = " << list(c.vehicle_counts, [](int v) { return std::to_string(v); }) << "\n";
  out << "penetration = " << list(c.penetrations, [](double v) { return format_number(v); }) << "\n";
  out << "methods = " << list(c.methods, [](Method m) { return std::string(to_string(m)); }) << "\n";
  out << "region_side = " << format_number(c.scenario.region_side) << "\n";
  out << "dt = " << format_number(c.scenario.dt) << "\n";
  out << "n_steps = " << c.scenario.n_steps << "\n";
  out << "holdout_steps = " << c.holdout_steps << "\n";
  out << "v_max = " << format_number(c.scenario.v_max) << "\n";
  out << "accel_sigma = " << format_number(c.scenario.accel_sigma) << "\n";
  out << "tx_power_dbm = " << format_number(c.scenario.channel.tx_power_dbm) << "\n";
  out << "path_loss_exponent = " << format_number(c.scenario.channel.path_loss_exponent) << "\n";
  out << "reference_distance = " << format_number(c.scenario.channel.reference_distance) << "\n";
  out << "rssi_noise_sigma = " << format_number(c.scenario.channel.noise_sigma) << "\n";
  out << "message_speed = " << format_number(c.scenario.channel.message_speed) << "\n";
  out << "rssi_min = " << format_number(c.rssi_min) << "\n";
  out << "rssi_max = " << format_number(c.rssi_max) << "\n";
  out << "attack.fixed_x = " << format_number(c.attack.fixed_point.x) << "\n";
  out << "attack.fixed_y = " << format_number(c.attack.fixed_point.y) << "\n";
  out << "attack.offset_x = " << format_number(c.attack.fixed_offset.x) << "\n";
  out << "attack.offset_y = " << format_number(c.attack.fixed_offset.y) << "\n";
  out << "attack.random_offset_range = " << format_number(c.attack.random_offset_range) << "\n";
  out << "attack.stop_probability = " << format_number(c.attack.p_freeze) << "\n";
  out << "hidden_size = " << c.model.hidden_size << "\n";
  out << "learning_rate = " << format_number(c.model.learning_rate) << "\n";
  out << "momentum = " << format_number(c.model.momentum) << "\n";
  out << "batch_size = " << c.model.batch_size << "\n";
  out << "local_episodes = " << c.model.local_episodes << "\n";
  out << "global_rounds = " << c.model.global_rounds << "\n";
  out << "gate = " << (c.gate.strategy == GateStrategy::AccuracyGate ? "accuracy" : "random") << "\n";
  out << "gamma = " << format_number(c.gate.gamma) << "\n";
  for (const auto& [key, type] : detail::xi_keys()) out << key << " = " << format_number(c.xi[type]) << "\n";
  out << "repeats = " << c.repeats << "\n";
  out << "seed = " << c.master_seed << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  out << "threads = " << c.threads << "\n";
  out << "record_wallclock = " << (c.record_wallclock ? "true" : "false") << "\n";
  out << "checkpoint_every = " << c.checkpoint_every << "\n";
  return out.str();
}

}  // namespace fltp
