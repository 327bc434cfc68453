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

#include <gtest/gtest.h>

#include "fltp/attack_injection.hpp"

namespace fltp {
namespace {

VehicleState truth_at(double x, double y, double sx = 12.0, double sy = -3.0) { return {3, 17, x, y, sx, sy}; }

AttackParams params() { return AttackParams::for_region(10000.0, 40.0); }

TEST(Inject, GenuineIsIdentity) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto t = truth_at(rng.uniform(0, 10000), rng.uniform(0, 10000), rng.uniform(-40, 40), rng.uniform(-40, 40));
    const auto out = inject(AttackerType::Genuine, t, {{1.0, 2.0}}, params(), rng);
    EXPECT_EQ(out.claim.pos, t.pos());
    EXPECT_EQ(out.claim.spd, t.spd());
    EXPECT_EQ(out.memory.prev_pos, t.pos());
  }
}

TEST(Inject, ConstantReportsFixedPoint) {
  Rng rng(1);
  auto p = params();
  p.fixed_point = {1234.0, 987.0};
  const auto a = inject(AttackerType::Constant, truth_at(10, 20), {}, p, rng);
  const auto b = inject(AttackerType::Constant, truth_at(9000, 40), {}, p, rng);
  EXPECT_EQ(a.claim.pos, (Point2{1234.0, 987.0}));
  EXPECT_EQ(b.claim.pos, a.claim.pos);
  EXPECT_EQ(a.claim.spd, (Point2{0.0, 0.0}));
}

TEST(Inject, ConstantOffsetAddsFixedOffset) {
  Rng rng(1);
  auto p = params();
  p.fixed_offset = {50.0, -30.0};
  const auto out = inject(AttackerType::ConstantOffset, truth_at(100, 200), {}, p, rng);
  EXPECT_EQ(out.claim.pos, (Point2{150.0, 170.0}));
  EXPECT_DOUBLE_EQ(out.claim.spd.x, 12.0 + 50.0 * 40.0 / 10000.0);
  EXPECT_DOUBLE_EQ(out.claim.spd.y, -3.0 - 30.0 * 40.0 / 10000.0);
}

TEST(Inject, MemoryTracksTruthfulPosition) {
  Rng rng(2);
  auto p = params();
  p.p_freeze = 1.0;
  p.p_truthful = 0.0;
  AttackerMemory mem = AttackerMemory::at_spawn(truth_at(0, 0));
  for (int t = 1; t < 5; ++t) {
    const auto truth = truth_at(10.0 * t, 5.0 * t);
    const auto out = inject(AttackerType::EventualStop, truth, mem, p, rng);
    EXPECT_EQ(out.claim.pos, mem.prev_pos);
    EXPECT_EQ(out.claim.spd, (Point2{0.0, 0.0}));
    EXPECT_EQ(out.memory.prev_pos, truth.pos());
    mem = out.memory;
  }
}

TEST(InjectConstant, IndependentOfTimeAndTruth) {
  auto p = params();
  EXPECT_EQ(inject_constant(p), (Point2{5000.0, 5000.0}));
  p.fixed_point = {0.0, 0.0};
  EXPECT_EQ(inject_constant(p), (Point2{0.0, 0.0}));
}

TEST(InjectOffset, DegenerateOffsetsReturnTruth) {
  Rng rng(5);
  auto p = params();
  p.fixed_offset = {0.0, 0.0};
  p.random_offset_range = 0.0;
  const auto t = truth_at(321.0, 654.0);
  EXPECT_EQ(inject_offset(t, OffsetMode::Constant, p, rng), t.pos());
  EXPECT_EQ(inject_offset(t, OffsetMode::Random, p, rng), t.pos());
}

TEST(InjectOffset, RandomOffsetStaysInRangeAndIsCentred) {
  Rng rng(2024);
  auto p = params();
  p.random_offset_range = 100.0;
  const auto t = truth_at(5000.0, 5000.0);
  double sx = 0.0, sy = 0.0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const auto c = inject_offset(t, OffsetMode::Random, p, rng);
    ASSERT_LE(std::abs(c.x - t.pos_x), 100.0);
    ASSERT_LE(std::abs(c.y - t.pos_y), 100.0);
    sx += c.x;
    sy += c.y;
  }
  // 3 sigma of the mean of U[-100, 100] over 10k draws is 1.73 m.
  EXPECT_NEAR(sx / kDraws, t.pos_x, 3.0);
  EXPECT_NEAR(sy / kDraws, t.pos_y, 3.0);
}

TEST(InjectOffset, OutOfRegionClaimsAreNotClamped) {
  Rng rng(1);
  auto p = params();
  p.fixed_offset = {250.0, -150.0};
  const auto c = inject_offset(truth_at(9900.0, 100.0), OffsetMode::Constant, p, rng);
  EXPECT_DOUBLE_EQ(c.x, 10150.0);
  EXPECT_DOUBLE_EQ(c.y, -50.0);
}

TEST(InjectEventualStop, ExtremeProbabilities) {
  Rng rng(9);
  auto p = params();
  const auto t = truth_at(400.0, 500.0);
  const AttackerMemory mem{{390.0, 495.0}};
  p.p_freeze = 0.0;
  p.p_truthful = 1.0;
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(inject_eventual_stop(t, mem, p, rng), t.pos());
  p.p_freeze = 1.0;
  p.p_truthful = 0.0;
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(inject_eventual_stop(t, mem, p, rng), mem.prev_pos);
}

TEST(InjectEventualStop, FreezeFrequencyMatchesProbability) {
  Rng rng(77);
  auto p = params();
  p.p_freeze = 0.3;
  p.p_truthful = 0.7;
  const auto t = truth_at(400.0, 500.0);
  const AttackerMemory mem{{390.0, 495.0}};
  int frozen = 0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const auto c = inject_eventual_stop(t, mem, p, rng);
    ASSERT_TRUE(c == t.pos() || c == mem.prev_pos);
    frozen += c == mem.prev_pos ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(frozen) / kDraws, 0.3, 0.014);
}

TEST(InjectRandom, UniformOverRegion) {
  Rng rng(31);
  const auto p = params();
  double sx = 0.0, sy = 0.0;
  Point2 prev{-1.0, -1.0};
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const auto c = inject_random(p, rng);
    ASSERT_GE(c.x, 0.0);
    ASSERT_LE(c.x, p.region_side);
    ASSERT_GE(c.y, 0.0);
    ASSERT_LE(c.y, p.region_side);
    ASSERT_NE(c, prev);
    prev = c;
    sx += c.x;
    sy += c.y;
  }
  EXPECT_NEAR(sx / kDraws, 5000.0, 90.0);
  EXPECT_NEAR(sy / kDraws, 5000.0, 90.0);
}

TEST(InjectRandom, SpeedWithinLimits) {
  Rng rng(4);
  const auto p = params();
  for (int i = 0; i < 1000; ++i) {
    const auto out = inject(AttackerType::Random, truth_at(1, 1), {}, p, rng);
    ASSERT_LE(std::abs(out.claim.spd.x), p.v_max);
    ASSERT_LE(std::abs(out.claim.spd.y), p.v_max);
  }
}

TEST(Inject, DeterministicGivenStream) {
  const auto p = params();
  for (auto type : kAttackClasses) {
    Rng a(99), b(99);
    AttackerMemory ma{{1, 1}}, mb{{1, 1}};
    for (int t = 0; t < 50; ++t) {
      const auto truth = truth_at(100.0 + t, 200.0 - t);
      const auto ra = inject(type, truth, ma, p, a);
      const auto rb = inject(type, truth, mb, p, b);
      ASSERT_EQ(ra.claim, rb.claim) << to_string(type);
      ma = ra.memory;
      mb = rb.memory;
    }
  }
}

TEST(AttackParams, Validation) {
  auto p = params();
  EXPECT_NO_THROW(p.validate());
  p.p_freeze = 0.6;
  EXPECT_THROW(p.validate(), DomainError);
  p = params();
  p.random_offset_range = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = params();
  p.fixed_point = {-1.0, 0.0};
  EXPECT_THROW(p.validate(), DomainError);
}

}  // namespace
}  // namespace fltp
