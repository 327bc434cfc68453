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

#include <algorithm>
#include <numeric>

#include "fltp/federated.hpp"
#include "support/lstm_oracle.hpp"

namespace fltp {
namespace {

LocalUpdate update_with(int id, std::size_t total, AttackHistogram counts, std::size_t hidden = 1, double fill = 0.0) {
  LocalUpdate u;
  u.vehicle_id = id;
  u.params = ModelParams::from_flat(hidden, std::vector<double>(ModelParams::flat_size(hidden), fill));
  u.total_samples = total;
  u.attack_counts = counts;
  return u;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(MreWeights, WorkedTwoVehicleExample) {
  const std::vector<LocalUpdate> ups{update_with(0, 100, {}), update_with(1, 100, {50, 0, 0, 0, 0})};
  const auto lambda = mre_weights(ups, InfluenceTable{});
  ASSERT_EQ(lambda.size(), 2u);
  EXPECT_NEAR(lambda[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(lambda[1], 1.0 / 3.0, 1e-12);
}

TEST(MreWeights, SymmetryGivesUniformWeights) {
  std::vector<LocalUpdate> ups;
  for (int i = 0; i < 7; ++i) ups.push_back(update_with(i, 90, {3, 4, 5, 6, 7}));
  for (double w : mre_weights(ups, InfluenceTable{})) EXPECT_NEAR(w, 1.0 / 7.0, 1e-12);
}

TEST(MreWeights, ZeroInfluenceGivesUniformWeights) {
  std::vector<LocalUpdate> ups{update_with(0, 10, {10, 0, 0, 0, 0}), update_with(1, 50, {}), update_with(2, 7, {1, 1, 1, 1, 1})};
  for (double w : mre_weights(ups, InfluenceTable::uniform(0.0))) EXPECT_EQ(w, 1.0 / 3.0);
}

TEST(MreWeights, ProbabilityVectorAndScaleConsistency) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    std::vector<LocalUpdate> ups, scaled;
    InfluenceTable xi;
    for (double& x : xi.xi) x = rng.uniform(0.0, 2.0);
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t total = 1 + rng.index(200);
      AttackHistogram h{};
      std::size_t left = total;
      for (auto& c : h) {
        c = rng.index(left / 2 + 1);
        left -= c;
      }
      ups.push_back(update_with(static_cast<int>(v), total, h));
      AttackHistogram h3 = h;
      for (auto& c : h3) c *= 3;
      scaled.push_back(update_with(static_cast<int>(v), total * 3, h3));
    }
    const auto lam = mre_weights(ups, xi);
    const auto lam3 = mre_weights(scaled, xi);
    EXPECT_NEAR(sum(lam), 1.0, 1e-12);
    for (std::size_t v = 0; v < n; ++v) {
      EXPECT_GE(lam[v], 0.0);
      EXPECT_NEAR(lam[v], lam3[v], 1e-12);
    }
  }
}

TEST(MreWeights, MonotoneInAttackCounts) {
  std::vector<LocalUpdate> ups{update_with(0, 100, {10, 0, 0, 0, 0}), update_with(1, 100, {5, 5, 0, 0, 0}),
                               update_with(2, 100, {})};
  const auto before = mre_weights(ups, InfluenceTable{});
  ups[1].attack_counts[3] += 20;
  const auto after = mre_weights(ups, InfluenceTable{});
  EXPECT_LT(after[1], before[1]);
  EXPECT_GE(after[0], before[0]);
  EXPECT_GE(after[2], before[2]);
  EXPECT_NEAR(sum(after), 1.0, 1e-12);
}

TEST(MreWeights, EffectivenessIsClamped) {
  InfluenceTable heavy = InfluenceTable::uniform(5.0);
  std::vector<LocalUpdate> ups{update_with(0, 10, {10, 0, 0, 0, 0}), update_with(1, 10, {})};
  const auto lam = mre_weights(ups, heavy);
  EXPECT_GT(lam[0], 0.0);
  EXPECT_NEAR(lam[0], kMinEffectiveness / (1.0 + kMinEffectiveness), 1e-15);
}

TEST(MreWeights, Errors) {
  EXPECT_THROW(mre_weights({}, InfluenceTable{}), DomainError);
  std::vector<LocalUpdate> bad{update_with(0, 3, {2, 2, 0, 0, 0})};
  EXPECT_THROW(mre_weights(bad, InfluenceTable{}), DomainError);
}

TEST(DecideMode, AccuracyGate) {
  Rng rng(1);
  const GateConfig gate;
  EXPECT_EQ(decide_mode(gate, 0.0, rng), AggregationMode::UniformAverage);
  EXPECT_EQ(decide_mode(gate, 0.95, rng), AggregationMode::MrEWeighted);
  EXPECT_EQ(decide_mode(gate, 0.2, rng), AggregationMode::MrEWeighted);
}

TEST(DecideMode, RandomGate) {
  Rng rng(2);
  GateConfig never{GateStrategy::RandomGate, 0.0};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(decide_mode(never, 0.0, rng), AggregationMode::MrEWeighted);
  GateConfig often{GateStrategy::RandomGate, 0.2};
  int uniform = 0;
  for (int i = 0; i < 10000; ++i) uniform += decide_mode(often, 1.0, rng) == AggregationMode::UniformAverage;
  EXPECT_NEAR(uniform / 10000.0, 0.2, 0.012);
}

TEST(Aggregate, SingleUpdateIsReturnedExactly) {
  Rng rng(3);
  LocalUpdate u = update_with(4, 1, {}, 3);
  u.params = init_params(3, rng);
  const std::vector<LocalUpdate> ups{u};
  const std::vector<double> w{1.0};
  EXPECT_EQ(aggregate(ups, w).flatten(), u.params.flatten());
}

TEST(Aggregate, IdenticalParamsAreAFixedPoint) {
  Rng rng(5);
  const ModelParams p = init_params(4, rng);
  std::vector<LocalUpdate> ups;
  for (int i = 0; i < 7; ++i) {
    ups.push_back(update_with(i, 1, {}, 4));
    ups.back().params = p;
  }
  const std::vector<double> w(7, 1.0 / 7.0);
  EXPECT_EQ(aggregate(ups, w).flatten(), p.flatten());
}

TEST(Aggregate, WeightedExample) {
  const std::vector<LocalUpdate> ups{update_with(0, 1, {}, 2, 1.0), update_with(1, 1, {}, 2, 3.0)};
  const std::vector<double> w{0.25, 0.75};
  const ModelParams out = aggregate(ups, w);
  for (double v : out.values()) EXPECT_EQ(v, 2.5);
}

TEST(Aggregate, PermutationInvariant) {
  Rng rng(9);
  std::vector<LocalUpdate> ups;
  std::vector<double> w;
  for (int i = 0; i < 5; ++i) {
    ups.push_back(update_with(i, 1, {}, 3));
    ups.back().params = init_params(3, rng);
    w.push_back(rng.uniform(0.1, 1.0));
  }
  const double total = sum(w);
  for (double& x : w) x /= total;
  const auto ref = aggregate(ups, w).flatten();
  std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  std::vector<LocalUpdate> pu;
  std::vector<double> pw;
  for (std::size_t i : perm) {
    pu.push_back(ups[i]);
    pw.push_back(w[i]);
  }
  EXPECT_EQ(aggregate(pu, pw).flatten(), ref);
}

TEST(Aggregate, Errors) {
  const std::vector<LocalUpdate> mixed{update_with(0, 1, {}, 2), update_with(1, 1, {}, 3)};
  const std::vector<double> half{0.5, 0.5};
  EXPECT_THROW(aggregate(mixed, half), ContractViolation);
  const std::vector<LocalUpdate> ok{update_with(0, 1, {}, 2), update_with(1, 1, {}, 2)};
  const std::vector<double> bad{0.5, 0.6};
  EXPECT_THROW(aggregate(ok, bad), ContractViolation);
  const std::vector<double> one{1.0};
  EXPECT_THROW(aggregate(ok, one), ContractViolation);
  EXPECT_THROW(aggregate({}, {}), DomainError);
}

/// Small labelled datasets with a mix of sender types.
std::vector<std::vector<Sample>> client_data(std::uint64_t seed, std::size_t clients, std::size_t per_client) {
  Rng rng(seed);
  std::vector<std::vector<Sample>> out(clients);
  for (std::size_t c = 0; c < clients; ++c) {
    for (std::size_t i = 0; i < per_client; ++i) {
      Sample s = oracle::random_sample(rng);
      s.sender_type = attacker_from_code(static_cast<int>(rng.index(kAttackerTypeCount)));
      for (std::size_t n = 0; n < kHorizon; ++n) s.label.atk(n) = static_cast<double>(code(s.sender_type));
      out[c].push_back(s);
    }
  }
  return out;
}

std::vector<Client> make_clients(const std::vector<std::vector<Sample>>& data) {
  std::vector<Client> out;
  for (std::size_t c = 0; c < data.size(); ++c) out.push_back({static_cast<int>(c), c, data[c]});
  return out;
}

FederatedOptions small_options() {
  FederatedOptions o;
  o.train = {2, 8, {0.01, 0.5}};
  o.seed = 99;
  return o;
}

TEST(FederatedRound, IdenticalClientsAggregateToTheSingleModel) {
  const auto data = client_data(1, 1, 24);
  const std::vector<std::vector<Sample>> copies(4, data[0]);
  std::vector<Client> clients;
  for (int c = 0; c < 4; ++c) clients.push_back({c, 0, copies[static_cast<std::size_t>(c)]});
  Rng init(2);
  FederationState state{init_params(4, init), 0.0, 0};
  const auto options = small_options();
  Rng gate(3);
  const auto result = run_flt_round(state, clients, data[0], options, gate);
  Rng local = local_rng(options, 0, 0);
  const auto single = train_local(state.global, data[0], options.train, local);
  EXPECT_EQ(result.next.global.flatten(), single.params.flatten());
}

TEST(FederatedRound, ZeroLearningRateKeepsParams) {
  const auto data = client_data(4, 3, 16);
  const auto clients = make_clients(data);
  Rng init(5);
  FederationState state{init_params(3, init), 0.0, 0};
  auto options = small_options();
  options.train.sgd.learning_rate = 0.0;
  Rng gate(6);
  for (int r = 0; r < 3; ++r) {
    const auto next = run_flt_round(state, clients, data[0], options, gate).next;
    EXPECT_EQ(next.global.flatten(), state.global.flatten());
    EXPECT_EQ(next.round, r + 1);
    state = next;
  }
}

std::vector<RoundReport> run_rounds(int rounds, std::size_t threads, bool fedavg, const InfluenceTable& xi,
                                    std::vector<std::vector<double>>* globals = nullptr) {
  const auto data = client_data(10, 4, 20);
  const auto clients = make_clients(data);
  const auto holdout = client_data(11, 1, 10)[0];
  Rng init(12);
  FederationState state{init_params(4, init), 0.0, 0};
  auto options = small_options();
  options.threads = threads;
  options.xi = xi;
  options.gate.gamma = 0.0;  // MrE weighting from the first round
  Rng gate(13);
  std::vector<RoundReport> out;
  for (int r = 0; r < rounds; ++r) {
    auto res = fedavg ? run_fedavg_round(state, clients, holdout, options)
                      : run_flt_round(state, clients, holdout, options, gate);
    out.push_back(res.report);
    state = std::move(res.next);
    if (globals) globals->push_back(state.global.flatten());
  }
  return out;
}

void expect_same_reports(const std::vector<RoundReport>& a, const std::vector<RoundReport>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].round, b[i].round);
    EXPECT_EQ(a[i].mode, b[i].mode);
    EXPECT_EQ(a[i].lambda, b[i].lambda);
    EXPECT_EQ(a[i].prediction_error_m, b[i].prediction_error_m);
    EXPECT_EQ(a[i].prediction_accuracy, b[i].prediction_accuracy);
    EXPECT_EQ(a[i].loss, b[i].loss);
  }
}

TEST(FederatedRound, SeededRunsAreBitIdentical) {
  const auto a = run_rounds(3, 1, false, InfluenceTable{});
  const auto b = run_rounds(3, 1, false, InfluenceTable{});
  expect_same_reports(a, b);
  EXPECT_EQ(a[0].mode, AggregationMode::MrEWeighted);
  EXPECT_NE(a[0].lambda[0], a[0].lambda[1]);
}

TEST(FederatedRound, ThreadCountDoesNotChangeResults) {
  expect_same_reports(run_rounds(3, 1, false, InfluenceTable{}), run_rounds(3, 4, false, InfluenceTable{}));
}

TEST(FederatedRound, FedAvgEqualsFlTpWithZeroInfluence) {
  std::vector<std::vector<double>> flt, avg;
  run_rounds(5, 1, false, InfluenceTable::uniform(0.0), &flt);
  const auto reports = run_rounds(5, 1, true, InfluenceTable{}, &avg);
  EXPECT_EQ(flt, avg);
  for (const auto& r : reports) EXPECT_EQ(r.mode, AggregationMode::UniformAverage);
}

TEST(Centralized, SingleVehicleFedAvgMatchesCentralized) {
  const auto data = client_data(20, 1, 30);
  const auto clients = make_clients(data);
  Rng init(21);
  const FederationState state{init_params(3, init), 0.0, 0};
  const auto options = small_options();
  const auto fed = run_fedavg_round(state, clients, data[0], options);
  const auto cen = run_centralized_round(state, data[0], data[0], options);
  EXPECT_EQ(fed.next.global.flatten(), cen.next.global.flatten());
  EXPECT_EQ(cen.report.mode, AggregationMode::Pooled);
}

TEST(Centralized, ZeroEpisodesAndDescent) {
  const auto data = client_data(30, 1, 40)[0];
  Rng init(31);
  const ModelParams p0 = init_params(6, init);
  Rng rng(32);
  EXPECT_EQ(run_centralized(p0, data, {0, 8, {0.01, 0.5}}, rng).params.flatten(), p0.flatten());
  const auto trained = run_centralized(p0, data, {10, 8, {0.005, 0.5}}, rng);
  EXPECT_LT(dataset_loss(trained.params, data), dataset_loss(p0, data));
}

TEST(AttackHistogram, CountsByType) {
  const auto data = client_data(40, 1, 200)[0];
  const auto h = attack_histogram(data);
  std::size_t genuine = 0;
  for (const auto& s : data) genuine += s.sender_type == AttackerType::Genuine;
  EXPECT_EQ(std::accumulate(h.begin(), h.end(), std::size_t{0}) + genuine, data.size());
}

}  // namespace
}  // namespace fltp
