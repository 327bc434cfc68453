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

// Normalized model inputs and supervision targets built from received
// message streams.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fltp/errors.hpp"
#include "fltp/trace_model.hpp"

namespace fltp {

inline constexpr std::size_t kInputSteps = 10;
inline constexpr std::size_t kFeatureCount = 9;
inline constexpr std::size_t kHorizon = 5;
inline constexpr std::size_t kTargetsPerStep = 3;  // loc_x, loc_y, atk
inline constexpr std::size_t kOutputSize = kHorizon * kTargetsPerStep;
inline constexpr std::size_t kWindowSpan = kInputSteps + kHorizon;

/// Column order of a feature row.
enum Feature : std::size_t {
  kLocX = 0, kLocY, kSpdX, kSpdY, kDisChgX, kDisChgY, kSpdChgX, kSpdChgY, kRssi,
};

struct NormalizationSpec {
  double region_side = 10000.0;
  double v_max = 40.0;
  double rssi_min = -100.0;
  double rssi_max = -40.0;

  void validate() const {
    if (!(region_side > 0.0) || !(v_max > 0.0)) throw DomainError("region_side and v_max must be positive");
    if (!(rssi_min < rssi_max)) throw DomainError("rssi_min must be below rssi_max");
  }

  Point2 normalize_pos(Point2 p) const { return {p.x / region_side, p.y / region_side}; }

  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

struct FeatureWindow {
  std::array<double, kInputSteps * kFeatureCount> values{};

  double& at(std::size_t step, std::size_t feature) { return values[step * kFeatureCount + feature]; }
  double at(std::size_t step, std::size_t feature) const { return values[step * kFeatureCount + feature]; }
  std::span<const double, kFeatureCount> row(std::size_t step) const {
    return std::span<const double, kFeatureCount>(values.data() + step * kFeatureCount, kFeatureCount);
  }
  friend bool operator==(const FeatureWindow&, const FeatureWindow&) = default;
};

/// Five future steps of (loc_x, loc_y, atk). Used both for labels and for
/// model outputs.
struct HorizonBlock {
  std::array<double, kOutputSize> values{};

  double& loc_x(std::size_t n) { return values[n * kTargetsPerStep]; }
  double& loc_y(std::size_t n) { return values[n * kTargetsPerStep + 1]; }
  double& atk(std::size_t n) { return values[n * kTargetsPerStep + 2]; }
  double loc_x(std::size_t n) const { return values[n * kTargetsPerStep]; }
  double loc_y(std::size_t n) const { return values[n * kTargetsPerStep + 1]; }
  double atk(std::size_t n) const { return values[n * kTargetsPerStep + 2]; }
  friend bool operator==(const HorizonBlock&, const HorizonBlock&) = default;
};

using LabelBlock = HorizonBlock;

struct Sample {
  FeatureWindow input;
  LabelBlock label;
  int sender_id = 0;
  int receiver_id = 0;
  std::int64_t first_step = 0;
  AttackerType sender_type = AttackerType::Genuine;
};

namespace detail {

inline double checked(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite value in message stream");
  return v;
}

}  // namespace detail

/// Builds the 10x9 input from ten consecutive messages of one sender and the
/// ego states at the same steps.
inline FeatureWindow build_feature_window(std::span<const Bsm> msgs, std::span<const VehicleState> ego,
                                          const NormalizationSpec& spec) {
  if (msgs.size() != kInputSteps || ego.size() != kInputSteps) {
    throw ContractViolation("feature window needs exactly 10 messages and 10 ego states");
  }
  FeatureWindow w;
  const double r = spec.region_side;
  const double v = spec.v_max;
  const double rssi_span = spec.rssi_max - spec.rssi_min;
  for (std::size_t k = 0; k < kInputSteps; ++k) {
    const Bsm& m = msgs[k];
    const VehicleState& e = ego[k];
    if (m.sender_id != msgs[0].sender_id) throw ContractViolation("feature window mixes senders");
    if (m.step != msgs[0].step + static_cast<std::int64_t>(k)) throw WindowError("gap in message steps");
    if (e.t != m.step) throw WindowError("ego state not aligned with message step");
    const double px = detail::checked(m.claimed_pos_x), py = detail::checked(m.claimed_pos_y);
    const double sx = detail::checked(m.claimed_spd_x), sy = detail::checked(m.claimed_spd_y);
    const double rssi = detail::checked(m.rssi);
    w.at(k, kLocX) = std::clamp(px / r, 0.0, 1.0);
    w.at(k, kLocY) = std::clamp(py / r, 0.0, 1.0);
    w.at(k, kSpdX) = std::clamp(sx / v, -1.0, 1.0);
    w.at(k, kSpdY) = std::clamp(sy / v, -1.0, 1.0);
    w.at(k, kDisChgX) = std::clamp((px - e.pos_x) / r, -1.0, 1.0);
    w.at(k, kDisChgY) = std::clamp((py - e.pos_y) / r, -1.0, 1.0);
    w.at(k, kSpdChgX) = std::clamp((sx - e.spd_x) / v, -1.0, 1.0);
    w.at(k, kSpdChgY) = std::clamp((sy - e.spd_y) / v, -1.0, 1.0);
    w.at(k, kRssi) = std::clamp((rssi - spec.rssi_min) / rssi_span, 0.0, 1.0);
  }
  return w;
}

/// Labels from the sender's true positions over the next five steps.
inline LabelBlock build_label(std::span<const VehicleState> future, AttackerType sender_type,
                              const NormalizationSpec& spec) {
  if (future.size() < kHorizon) throw WindowError("trajectory ends before the prediction horizon");
  LabelBlock y;
  for (std::size_t n = 0; n < kHorizon; ++n) {
    if (n > 0 && future[n].t != future[0].t + static_cast<std::int64_t>(n)) {
      throw WindowError("gap in future trajectory");
    }
    y.loc_x(n) = future[n].pos_x / spec.region_side;
    y.loc_y(n) = future[n].pos_y / spec.region_side;
    y.atk(n) = static_cast<double>(code(sender_type));
  }
  return y;
}

/// Stride-1 sliding windows over time-aligned streams: messages of one
/// sender, that sender's true states, and the receiver's own states, all
/// indexed by the same step. A stream of length L yields L - 14 samples when
/// it has no gaps; windows that straddle a gap are skipped.
inline std::vector<Sample> windows_from_stream(std::span<const Bsm> msgs, std::span<const VehicleState> sender_truth,
                                               std::span<const VehicleState> ego, const NormalizationSpec& spec) {
  if (msgs.size() != sender_truth.size() || msgs.size() != ego.size()) {
    throw ContractViolation("streams are not time-aligned");
  }
  std::vector<Sample> out;
  if (msgs.size() < kWindowSpan) return out;
  out.reserve(msgs.size() - kWindowSpan + 1);
  for (std::size_t start = 0; start + kWindowSpan <= msgs.size(); ++start) {
    const auto& last = msgs[start + kInputSteps - 1];
    if (sender_truth[start + kInputSteps].t != last.step + 1) continue;
    try {
      Sample s;
      s.input = build_feature_window(msgs.subspan(start, kInputSteps), ego.subspan(start, kInputSteps), spec);
      s.label = build_label(sender_truth.subspan(start + kInputSteps, kHorizon), msgs[start].truth_attacker, spec);
      s.sender_id = msgs[start].sender_id;
      s.receiver_id = msgs[start].receiver_id;
      s.first_step = msgs[start].step;
      s.sender_type = msgs[start].truth_attacker;
      out.push_back(s);
    } catch (const WindowError&) {
      continue;
    }
  }
  return out;
}

inline Point2 denormalize_pos(Point2 normalized, const NormalizationSpec& spec) {
  return {normalized.x * spec.region_side, normalized.y * spec.region_side};
}

}  // namespace fltp
