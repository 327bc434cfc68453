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

// Reader for VeReMi-style JSON Lines reception logs.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fltp/errors.hpp"
#include "fltp/trace_model.hpp"

namespace fltp {

/// Maps dataset attacker codes to AttackerType.
struct AttackerCodeMap {
  std::map<int, AttackerType> table = {
      {0, AttackerType::Genuine},      {1, AttackerType::Constant},
      {2, AttackerType::ConstantOffset}, {4, AttackerType::Random},
      {8, AttackerType::RandomOffset}, {16, AttackerType::EventualStop},
  };

  std::optional<AttackerType> lookup(int dataset_code) const {
    auto it = table.find(dataset_code);
    if (it == table.end()) return std::nullopt;
    return it->second;
  }
};

struct VeremiOptions {
  AttackerCodeMap codes;
  double dt = 1.0;          // seconds per step, for step indices
  int receiver_id = 0;      // the log owner
  int gps_record_type = 2;  // own-position records
  int bsm_record_type = 3;  // receptions
};

struct VeremiTrace {
  std::vector<Bsm> messages;          // file order
  std::vector<VehicleState> ego;      // from own-position records
  std::map<int, AttackerType> senders;
};

namespace detail {

inline std::vector<nlohmann::json> read_json_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path, 0);
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto row = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (row.is_discarded() || !row.is_object()) {
      throw IngestionError("unparseable record in " + path, line_no);
    }
    row["__line"] = line_no;
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
T field(const nlohmann::json& row, const char* name) {
  auto it = row.find(name);
  const auto line = row.at("__line").get<std::size_t>();
  if (it == row.end()) throw IngestionError(std::string("missing field '") + name + "'", line);
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw IngestionError(std::string("bad type for field '") + name + "'", line);
  }
}

inline Point2 planar(const nlohmann::json& row, const char* name) {
  const auto v = field<std::vector<double>>(row, name);
  if (v.size() < 2) {
    throw IngestionError(std::string("field '") + name + "' needs at least 2 components",
                         row.at("__line").get<std::size_t>());
  }
  return {v[0], v[1]};
}

}  // namespace detail

/// Reads a reception log and its ground-truth file. Own-position records
/// become ego VehicleStates; reception records become Bsm with the sender's
/// attacker label joined from the ground truth.
inline VeremiTrace ingest_veremi(const std::string& log_path, const std::string& ground_truth_path,
                                 const VeremiOptions& options = {}) {
  VeremiTrace trace;
  for (const auto& row : detail::read_json_lines(ground_truth_path)) {
    const int sender = detail::field<int>(row, "sender");
    const int dataset_code = detail::field<int>(row, "attackerType");
    auto mapped = options.codes.lookup(dataset_code);
    if (!mapped) {
      throw IngestionError("unknown attackerType " + std::to_string(dataset_code),
                           row.at("__line").get<std::size_t>());
    }
    auto [it, inserted] = trace.senders.emplace(sender, *mapped);
    if (!inserted && it->second != *mapped) {
      throw IngestionError("conflicting attackerType for sender " + std::to_string(sender),
                           row.at("__line").get<std::size_t>());
    }
  }

  for (const auto& row : detail::read_json_lines(log_path)) {
    const int type = detail::field<int>(row, "type");
    const auto line = row.at("__line").get<std::size_t>();
    if (type == options.gps_record_type) {
      VehicleState s;
      s.vehicle_id = options.receiver_id;
      const double t = detail::field<double>(row, "rcvTime");
      s.t = std::llround(t / options.dt);
      const auto pos = detail::planar(row, "pos");
      const auto spd = detail::planar(row, "spd");
      s.pos_x = pos.x;
      s.pos_y = pos.y;
      s.spd_x = spd.x;
      s.spd_y = spd.y;
      trace.ego.push_back(s);
    } else if (type == options.bsm_record_type) {
      Bsm m;
      m.sender_id = detail::field<int>(row, "sender");
      m.receiver_id = options.receiver_id;
      m.t_snd = detail::field<double>(row, "sendTime");
      m.t_rev = detail::field<double>(row, "rcvTime");
      if (m.t_rev < m.t_snd) throw IngestionError("rcvTime precedes sendTime", line);
      m.step = std::llround(m.t_snd / options.dt);
      (void)detail::field<std::int64_t>(row, "messageID");
      const auto pos = detail::planar(row, "pos");
      const auto spd = detail::planar(row, "spd");
      m.claimed_pos_x = pos.x;
      m.claimed_pos_y = pos.y;
      m.claimed_spd_x = spd.x;
      m.claimed_spd_y = spd.y;
      m.rssi = detail::field<double>(row, "RSSI");
      auto it = trace.senders.find(m.sender_id);
      if (it == trace.senders.end()) {
        throw IngestionError("sender " + std::to_string(m.sender_id) + " has no ground-truth entry", line);
      }
      m.truth_attacker = it->second;
      trace.messages.push_back(m);
    } else {
      throw IngestionError("unsupported record type " + std::to_string(type), line);
    }
  }
  return trace;
}

}  // namespace fltp
