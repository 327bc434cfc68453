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

// Message falsification for the five attack classes.

#pragma once

#include "fltp/errors.hpp"
#include "fltp/rng.hpp"
#include "fltp/trace_model.hpp"

namespace fltp {

struct AttackParams {
  Point2 fixed_point{5000.0, 5000.0};
  Point2 fixed_offset{250.0, -150.0};
  double random_offset_range = 300.0;  // delta_max, per axis
  double p_truthful = 0.7;             // P1
  double p_freeze = 0.3;               // P2
  double region_side = 10000.0;
  double v_max = 40.0;

  /// Defaults for a region: the fixed point sits at the centre.
  static AttackParams for_region(double region_side, double v_max) {
    AttackParams p;
    p.region_side = region_side;
    p.v_max = v_max;
    p.fixed_point = {region_side / 2.0, region_side / 2.0};
    return p;
  }

  void validate() const {
    if (!(region_side > 0.0)) throw DomainError("attack region_side must be positive");
    if (!(random_offset_range >= 0.0)) throw DomainError("random_offset_range must be >= 0");
    if (!(p_truthful >= 0.0 && p_truthful <= 1.0 && p_freeze >= 0.0 && p_freeze <= 1.0) ||
        std::abs(p_truthful + p_freeze - 1.0) > 1e-12) {
      throw DomainError("stop probabilities must lie in [0, 1] and sum to 1");
    }
    if (fixed_point.x < 0.0 || fixed_point.x > region_side || fixed_point.y < 0.0 ||
        fixed_point.y > region_side) {
      throw DomainError("fixed point must lie inside the region");
    }
  }

  friend bool operator==(const AttackParams&, const AttackParams&) = default;
};

/// Last truthful position of an attacker.
struct AttackerMemory {
  Point2 prev_pos;

  static AttackerMemory at_spawn(const VehicleState& s) { return {s.pos()}; }
};

struct Claim {
  Point2 pos;
  Point2 spd;
  friend bool operator==(const Claim&, const Claim&) = default;
};

struct InjectionResult {
  Claim claim;
  AttackerMemory memory;
};

enum class OffsetMode { Constant, Random };

inline Point2 inject_constant(const AttackParams& params) { return params.fixed_point; }

inline Point2 draw_random_offset(const AttackParams& params, Rng& rng) {
  const double d = params.random_offset_range;
  const double dx = rng.uniform(-d, d);
  const double dy = rng.uniform(-d, d);
  return {dx, dy};
}

inline Point2 inject_offset(const VehicleState& truth, OffsetMode mode, const AttackParams& params, Rng& rng) {
  const Point2 off = mode == OffsetMode::Constant ? params.fixed_offset : draw_random_offset(params, rng);
  return {truth.pos_x + off.x, truth.pos_y + off.y};
}

/// True with probability P2 (freeze at the previous position).
inline bool draw_freeze(const AttackParams& params, Rng& rng) { return rng.uniform() < params.p_freeze; }

inline Point2 inject_eventual_stop(const VehicleState& truth, const AttackerMemory& memory,
                                   const AttackParams& params, Rng& rng) {
  return draw_freeze(params, rng) ? memory.prev_pos : truth.pos();
}

inline Point2 inject_random(const AttackParams& params, Rng& rng) {
  const double x = rng.uniform(0.0, params.region_side);
  const double y = rng.uniform(0.0, params.region_side);
  return {x, y};
}

/// Falsifies one outgoing message according to the sender's type. The
/// returned memory always holds the truthful position of this step.
inline InjectionResult inject(AttackerType attacker, const VehicleState& truth, const AttackerMemory& memory,
                              const AttackParams& params, Rng& rng) {
  InjectionResult out{{truth.pos(), truth.spd()}, {truth.pos()}};
  const double speed_scale = params.v_max / params.region_side;
  switch (attacker) {
    case AttackerType::Genuine:
      break;
    case AttackerType::Constant:
      out.claim.pos = inject_constant(params);
      out.claim.spd = {0.0, 0.0};
      break;
    case AttackerType::ConstantOffset: {
      out.claim.pos = inject_offset(truth, OffsetMode::Constant, params, rng);
      out.claim.spd = {truth.spd_x + params.fixed_offset.x * speed_scale,
                       truth.spd_y + params.fixed_offset.y * speed_scale};
      break;
    }
    case AttackerType::Random: {
      out.claim.pos = inject_random(params, rng);
      const double sx = rng.uniform(-params.v_max, params.v_max);
      const double sy = rng.uniform(-params.v_max, params.v_max);
      out.claim.spd = {sx, sy};
      break;
    }
    case AttackerType::RandomOffset: {
      const Point2 off = draw_random_offset(params, rng);
      out.claim.pos = {truth.pos_x + off.x, truth.pos_y + off.y};
      out.claim.spd = {truth.spd_x + off.x * speed_scale, truth.spd_y + off.y * speed_scale};
      break;
    }
    case AttackerType::EventualStop:
      if (draw_freeze(params, rng)) {
        out.claim.pos = memory.prev_pos;
        out.claim.spd = {0.0, 0.0};
      }
      break;
  }
  return out;
}

}  // namespace fltp
