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

// Ground-truth kinematics and the wireless channel for synthetic traces.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "fltp/errors.hpp"
#include "fltp/rng.hpp"

namespace fltp {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Sender behaviour. The numeric value is also the regression target for
/// attack detection.
enum class AttackerType : int {
  Genuine = 0,
  Constant = 1,
  ConstantOffset = 2,
  Random = 3,
  RandomOffset = 4,
  EventualStop = 5,
};

inline constexpr std::size_t kAttackerTypeCount = 6;
inline constexpr std::size_t kAttackClassCount = 5;

inline constexpr std::array<AttackerType, kAttackClassCount> kAttackClasses = {
    AttackerType::Constant, AttackerType::ConstantOffset, AttackerType::Random,
    AttackerType::RandomOffset, AttackerType::EventualStop};

constexpr int code(AttackerType t) noexcept { return static_cast<int>(t); }

inline AttackerType attacker_from_code(int c) {
  if (c < 0 || c >= static_cast<int>(kAttackerTypeCount)) {
    throw DomainError("attacker code out of range: " + std::to_string(c));
  }
  return static_cast<AttackerType>(c);
}

constexpr std::string_view to_string(AttackerType t) noexcept {
  switch (t) {
    case AttackerType::Genuine: return "genuine";
    case AttackerType::Constant: return "constant";
    case AttackerType::ConstantOffset: return "constant_offset";
    case AttackerType::Random: return "random";
    case AttackerType::RandomOffset: return "random_offset";
    case AttackerType::EventualStop: return "eventual_stop";
  }
  return "unknown";
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct VehicleState {
  int vehicle_id = 0;
  std::int64_t t = 0;  // step index
  double pos_x = 0.0;
  double pos_y = 0.0;
  double spd_x = 0.0;
  double spd_y = 0.0;

  Point2 pos() const noexcept { return {pos_x, pos_y}; }
  Point2 spd() const noexcept { return {spd_x, spd_y}; }
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// One received basic safety message.
struct Bsm {
  int sender_id = 0;
  int receiver_id = 0;
  std::int64_t step = 0;  // send step index
  double t_snd = 0.0;
  double t_rev = 0.0;
  double claimed_pos_x = 0.0;
  double claimed_pos_y = 0.0;
  double claimed_spd_x = 0.0;
  double claimed_spd_y = 0.0;
  double rssi = 0.0;
  // Supervision only; never a model input.
  AttackerType truth_attacker = AttackerType::Genuine;

  friend bool operator==(const Bsm&, const Bsm&) = default;
};

struct ChannelParams {
  double tx_power_dbm = 20.0;
  double path_loss_exponent = 2.7;
  double reference_distance = 1.0;  // meters
  double noise_sigma = 2.0;         // dB
  double message_speed = kSpeedOfLight;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

struct ScenarioConfig {
  int n_vehicles = 4;
  double penetration = 0.5;
  double region_side = 10000.0;
  double dt = 1.0;
  int n_steps = 60;
  double v_max = 40.0;
  double accel_sigma = 0.5;
  std::uint64_t rng_seed = 1;
  ChannelParams channel;

  void validate() const {
    if (n_vehicles < 2) throw DomainError("n_vehicles must be >= 2");
    if (!(penetration >= 0.0 && penetration <= 1.0)) throw DomainError("penetration must lie in [0, 1]");
    if (!(region_side > 0.0)) throw DomainError("region_side must be positive");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (n_steps < 1) throw DomainError("n_steps must be >= 1");
    if (!(v_max > 0.0)) throw DomainError("v_max must be positive");
    if (!(accel_sigma >= 0.0)) throw DomainError("accel_sigma must be >= 0");
    if (!(channel.reference_distance > 0.0)) throw DomainError("reference_distance must be positive");
    if (!(channel.noise_sigma >= 0.0)) throw DomainError("noise_sigma must be >= 0");
    if (!(channel.message_speed > 0.0)) throw DomainError("message_speed must be positive");
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Received power in dBm from power in milliwatts.
inline double rssi_from_power(double p_mw) {
  if (!(p_mw > 0.0) || !std::isfinite(p_mw)) {
    throw DomainError("received power must be positive and finite");
  }
  return 10.0 * std::log10(p_mw);
}

/// Log-distance path loss with Gaussian shadowing. Distances below the
/// reference distance are clamped to it. Always consumes one normal draw.
inline double synth_rssi(double distance, const ChannelParams& channel, Rng& rng) {
  const double d = std::max(distance, channel.reference_distance);
  const double noise = rng.normal(0.0, 1.0) * channel.noise_sigma;
  return channel.tx_power_dbm -
         10.0 * channel.path_loss_exponent * std::log10(d / channel.reference_distance) + noise;
}

inline double delivery_time(double t_snd, double distance, double spd_msg = kSpeedOfLight) {
  if (!(spd_msg > 0.0)) throw DomainError("message speed must be positive");
  if (!(distance >= 0.0)) throw DomainError("distance must be non-negative");
  return t_snd + distance / spd_msg;
}

inline double distance(Point2 a, Point2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

namespace detail {

inline void reflect_axis(double& pos, double& spd, double side) {
  if (pos > side) {
    pos = 2.0 * side - pos;
    spd = -std::abs(spd);
  } else if (pos < 0.0) {
    pos = -pos;
    spd = std::abs(spd);
  }
  pos = std::clamp(pos, 0.0, side);
}

}  // namespace detail

/// Advances one step: position moves with the current velocity, reflecting at
/// the region boundary, then the velocity is perturbed by Gaussian
/// acceleration and clamped to +/- v_max per axis.
inline VehicleState step_kinematics(const VehicleState& state, const ScenarioConfig& config, Rng& rng) {
  VehicleState next = state;
  next.t = state.t + 1;
  next.pos_x += state.spd_x * config.dt;
  next.pos_y += state.spd_y * config.dt;
  detail::reflect_axis(next.pos_x, next.spd_x, config.region_side);
  detail::reflect_axis(next.pos_y, next.spd_y, config.region_side);
  const double ax = rng.normal(0.0, 1.0) * config.accel_sigma;
  const double ay = rng.normal(0.0, 1.0) * config.accel_sigma;
  next.spd_x = std::clamp(next.spd_x + ax * config.dt, -config.v_max, config.v_max);
  next.spd_y = std::clamp(next.spd_y + ay * config.dt, -config.v_max, config.v_max);
  return next;
}

struct Scenario {
  ScenarioConfig config;
  /// roles[v] is vehicle v's behaviour for the whole run. Vehicle 0 is the
  /// reference ego and is always genuine.
  std::vector<AttackerType> roles;
  /// steps[t][v]
  std::vector<std::vector<VehicleState>> steps;

  std::size_t attacker_count() const {
    return static_cast<std::size_t>(
        std::count_if(roles.begin(), roles.end(), [](AttackerType r) { return r != AttackerType::Genuine; }));
  }

  std::vector<VehicleState> trajectory(int vehicle) const {
    std::vector<VehicleState> out;
    out.reserve(steps.size());
    for (const auto& row : steps) out.push_back(row.at(static_cast<std::size_t>(vehicle)));
    return out;
  }
};

inline std::size_t attacker_count_for(int n_vehicles, double penetration) {
  // Guard against 0.5 * 4 evaluating to 2.0000000000000004.
  const double raw = penetration * static_cast<double>(n_vehicles - 1);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

/// Deterministic in config.rng_seed. ceil(penetration * (n - 1)) of the
/// non-ego vehicles (chosen by a seeded shuffle) become attackers, with types
/// assigned round-robin over the five attack classes.
inline Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario scenario;
  scenario.config = config;
  const auto n = static_cast<std::size_t>(config.n_vehicles);
  Rng rng(config.rng_seed);

  scenario.roles.assign(n, AttackerType::Genuine);
  std::vector<int> candidates;
  for (int v = 1; v < config.n_vehicles; ++v) candidates.push_back(v);
  rng.shuffle(std::span<int>(candidates));
  const std::size_t n_attackers = std::min(attacker_count_for(config.n_vehicles, config.penetration),
                                           candidates.size());
  for (std::size_t k = 0; k < n_attackers; ++k) {
    scenario.roles[static_cast<std::size_t>(candidates[k])] = kAttackClasses[k % kAttackClassCount];
  }

  std::vector<VehicleState> current(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto& s = current[v];
    s.vehicle_id = static_cast<int>(v);
    s.t = 0;
    s.pos_x = rng.uniform(0.0, config.region_side);
    s.pos_y = rng.uniform(0.0, config.region_side);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = rng.uniform(0.25, 0.75) * config.v_max;
    s.spd_x = std::clamp(speed * std::cos(heading), -config.v_max, config.v_max);
    s.spd_y = std::clamp(speed * std::sin(heading), -config.v_max, config.v_max);
  }

  scenario.steps.reserve(static_cast<std::size_t>(config.n_steps));
  scenario.steps.push_back(current);
  for (int t = 1; t < config.n_steps; ++t) {
    for (auto& s : current) s = step_kinematics(s, config, rng);
    scenario.steps.push_back(current);
  }
  return scenario;
}

}  // namespace fltp
