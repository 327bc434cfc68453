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

// Message exchange over a generated scenario: every vehicle broadcasts one
// (possibly falsified) message per step and every other vehicle receives it.

#pragma once

#include <cstdint>
#include <vector>

#include "fltp/attack_injection.hpp"
#include "fltp/feature_pipeline.hpp"
#include "fltp/rng.hpp"
#include "fltp/trace_model.hpp"

namespace fltp {

struct ReceptionLog {
  int receiver_id = 0;
  std::vector<VehicleState> ego;            // by step
  std::vector<std::vector<Bsm>> by_sender;  // [sender][step], empty for the receiver itself
};

inline std::vector<ReceptionLog> simulate_receptions(const Scenario& scenario, const AttackParams& params,
                                                     std::uint64_t seed) {
  const auto& cfg = scenario.config;
  const auto n = static_cast<std::size_t>(cfg.n_vehicles);
  std::vector<ReceptionLog> logs(n);
  for (std::size_t r = 0; r < n; ++r) {
    logs[r].receiver_id = static_cast<int>(r);
    logs[r].ego = scenario.trajectory(static_cast<int>(r));
    logs[r].by_sender.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      if (s != r) logs[r].by_sender[s].reserve(scenario.steps.size());
    }
  }

  std::vector<Rng> attack_rng;
  std::vector<Rng> channel_rng;
  std::vector<AttackerMemory> memory;
  for (std::size_t v = 0; v < n; ++v) {
    attack_rng.emplace_back(derive_seed(seed, {0xA77AC4ULL, v}));
    channel_rng.emplace_back(derive_seed(seed, {0xC4A22E1ULL, v}));
    memory.push_back(AttackerMemory::at_spawn(scenario.steps.front()[v]));
  }

  for (const auto& row : scenario.steps) {
    for (std::size_t s = 0; s < n; ++s) {
      const VehicleState& truth = row[s];
      const auto injected = inject(scenario.roles[s], truth, memory[s], params, attack_rng[s]);
      memory[s] = injected.memory;
      const double t_snd = static_cast<double>(truth.t) * cfg.dt;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == s) continue;
        const double d = distance(truth.pos(), row[r].pos());
        Bsm m;
        m.sender_id = static_cast<int>(s);
        m.receiver_id = static_cast<int>(r);
        m.step = truth.t;
        m.t_snd = t_snd;
        m.t_rev = delivery_time(t_snd, d, cfg.channel.message_speed);
        m.claimed_pos_x = injected.claim.pos.x;
        m.claimed_pos_y = injected.claim.pos.y;
        m.claimed_spd_x = injected.claim.spd.x;
        m.claimed_spd_y = injected.claim.spd.y;
        m.rssi = synth_rssi(d, cfg.channel, channel_rng[r]);
        m.truth_attacker = scenario.roles[s];
        logs[r].by_sender[s].push_back(m);
      }
    }
  }
  return logs;
}

struct VehicleDataset {
  int vehicle_id = 0;
  std::vector<Sample> train;
  std::vector<Sample> holdout;
};

/// Windows per receiver, split in time: windows that end before
/// `n_steps - holdout_steps` train, windows that start at or after it are
/// held out, and windows straddling the split are dropped.
inline std::vector<VehicleDataset> build_datasets(const Scenario& scenario, const std::vector<ReceptionLog>& logs,
                                                  const NormalizationSpec& spec, int holdout_steps) {
  const std::int64_t split = scenario.config.n_steps - holdout_steps;
  std::vector<VehicleDataset> out;
  out.reserve(logs.size());
  for (const auto& log : logs) {
    VehicleDataset ds;
    ds.vehicle_id = log.receiver_id;
    for (std::size_t s = 0; s < log.by_sender.size(); ++s) {
      const auto& msgs = log.by_sender[s];
      if (msgs.empty()) continue;
      const auto truth = scenario.trajectory(static_cast<int>(s));
      for (auto& sample : windows_from_stream(msgs, truth, log.ego, spec)) {
        const std::int64_t end = sample.first_step + static_cast<std::int64_t>(kWindowSpan);
        if (end <= split) {
          ds.train.push_back(sample);
        } else if (sample.first_step >= split) {
          ds.holdout.push_back(sample);
        }
      }
    }
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace fltp
