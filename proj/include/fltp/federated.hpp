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

// Federated rounds: local training, model-robust (MrE) weighting behind an
// accuracy gate, weighted aggregation, and the FedAvg / centralized
// baselines.

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fltp/errors.hpp"
#include "fltp/feature_pipeline.hpp"
#include "fltp/lstm.hpp"
#include "fltp/metrics.hpp"
#include "fltp/optimizer.hpp"
#include "fltp/parallel.hpp"
#include "fltp/rng.hpp"
#include "fltp/trace_model.hpp"

namespace fltp {

/// Counts of attack-labelled samples, indexed by attacker code - 1.
using AttackHistogram = std::array<std::size_t, kAttackClassCount>;

struct LocalUpdate {
  int vehicle_id = 0;
  ModelParams params;
  AttackHistogram attack_counts{};
  std::size_t total_samples = 1;
  double train_loss = 0.0;
};

/// Harm factor per attack class.
struct InfluenceTable {
  std::array<double, kAttackClassCount> xi = {1.0, 0.8, 1.0, 0.8, 1.0};

  static InfluenceTable uniform(double value) {
    InfluenceTable t;
    t.xi.fill(value);
    return t;
  }

  double& operator[](AttackerType t) { return xi.at(static_cast<std::size_t>(code(t) - 1)); }
  double operator[](AttackerType t) const { return xi.at(static_cast<std::size_t>(code(t) - 1)); }

  void validate() const {
    for (double v : xi) {
      if (!(v >= 0.0)) throw DomainError("influence factors must be non-negative");
    }
  }

  friend bool operator==(const InfluenceTable&, const InfluenceTable&) = default;
};

enum class GateStrategy { AccuracyGate, RandomGate };

struct GateConfig {
  GateStrategy strategy = GateStrategy::AccuracyGate;
  double gamma = 0.2;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
  }

  friend bool operator==(const GateConfig&, const GateConfig&) = default;
};

inline AttackHistogram attack_histogram(std::span<const Sample> samples) {
  AttackHistogram h{};
  for (const Sample& s : samples) {
    if (s.sender_type != AttackerType::Genuine) h[static_cast<std::size_t>(code(s.sender_type) - 1)] += 1;
  }
  return h;
}

inline constexpr double kMinEffectiveness = 1e-6;

/// lambda_n = E_n / sum_j E_j with E_n = 1 - sum_i U_i,n * xi_i / U_total,n,
/// E_n clamped below at 1e-6.
inline std::vector<double> mre_weights(std::span<const LocalUpdate> updates, const InfluenceTable& xi) {
  if (updates.empty()) throw DomainError("no local updates to weight");
  std::vector<double> e;
  e.reserve(updates.size());
  for (const auto& u : updates) {
    if (u.total_samples == 0) throw DomainError("local update without samples");
    const auto attacks = std::accumulate(u.attack_counts.begin(), u.attack_counts.end(), std::size_t{0});
    if (attacks > u.total_samples) throw DomainError("attack counts exceed total samples");
    double harm = 0.0;
    for (std::size_t i = 0; i < kAttackClassCount; ++i) {
      harm += static_cast<double>(u.attack_counts[i]) * xi.xi[i] / static_cast<double>(u.total_samples);
    }
    e.push_back(std::max(1.0 - harm, kMinEffectiveness));
  }
  const double total = std::accumulate(e.begin(), e.end(), 0.0);
  for (double& v : e) v /= total;
  return e;
}

/// AccuracyGate averages uniformly while the global model's detection
/// accuracy is below gamma. RandomGate draws a fresh uniform number instead.
inline AggregationMode decide_mode(const GateConfig& gate, double global_accuracy, Rng& rng) {
  switch (gate.strategy) {
    case GateStrategy::AccuracyGate:
      return global_accuracy < gate.gamma ? AggregationMode::UniformAverage : AggregationMode::MrEWeighted;
    case GateStrategy::RandomGate:
      return rng.uniform() < gate.gamma ? AggregationMode::UniformAverage : AggregationMode::MrEWeighted;
  }
  return AggregationMode::UniformAverage;
}

/// Convex combination sum_n lambda_n * params_n, reduced in ascending
/// vehicle_id order as a running weighted mean, so identical inputs map to
/// themselves exactly.
inline ModelParams aggregate(std::span<const LocalUpdate> updates, std::span<const double> weights) {
  if (updates.empty()) throw DomainError("nothing to aggregate");
  if (weights.size() != updates.size()) throw ContractViolation("one weight per update required");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("aggregation weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ContractViolation("aggregation weights must sum to 1");
  const std::size_t len = updates.front().params.size();
  std::vector<std::size_t> order(updates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return updates[a].vehicle_id < updates[b].vehicle_id; });
  for (const auto& u : updates) {
    if (u.params.size() != len || u.params.hidden() != updates.front().params.hidden()) {
      throw ContractViolation("parameter vectors differ in length");
    }
  }

  std::vector<double> acc(updates[order.front()].params.values().begin(),
                          updates[order.front()].params.values().end());
  double seen = weights[order.front()];
  for (std::size_t k = 1; k < order.size(); ++k) {
    const std::size_t n = order[k];
    const double w = weights[n];
    if (w == 0.0) continue;
    seen += w;
    const double step = w / seen;
    const auto p = updates[n].params.values();
    for (std::size_t i = 0; i < len; ++i) acc[i] += step * (p[i] - acc[i]);
  }
  return ModelParams::from_flat(updates.front().params.hidden(), std::move(acc));
}

/// One participant's local training data.
struct Client {
  int vehicle_id = 0;
  std::uint64_t rng_stream = 0;  // keys the local shuffling stream
  std::span<const Sample> data;
};

struct FederatedOptions {
  TrainOptions train;
  GateConfig gate;
  InfluenceTable xi;
  NormalizationSpec norm;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  double eta = kDefaultJudgmentThreshold;
};

struct FederationState {
  ModelParams global;
  double global_accuracy = 0.0;  // of `global` on the hold-out set; 0 before any evaluation
  int round = 0;
};

struct RoundResult {
  FederationState next;
  RoundReport report;
};

inline Rng local_rng(const FederatedOptions& options, int round, std::uint64_t stream) {
  return Rng(derive_seed(options.seed, {static_cast<std::uint64_t>(round), stream}));
}

inline std::vector<LocalUpdate> train_clients(const ModelParams& global, std::span<const Client> clients, int round,
                                              const FederatedOptions& options) {
  std::vector<LocalUpdate> updates(clients.size());
  parallel_for(clients.size(), options.threads, [&](std::size_t i) {
    const Client& c = clients[i];
    Rng rng = local_rng(options, round, c.rng_stream);
    auto trained = train_local(global, c.data, options.train, rng);
    LocalUpdate& u = updates[i];
    u.vehicle_id = c.vehicle_id;
    u.params = std::move(trained.params);
    u.attack_counts = attack_histogram(c.data);
    u.total_samples = c.data.size();
    u.train_loss = trained.final_loss;
  });
  return updates;
}

namespace detail {

inline RoundResult finish_round(const FederationState& state, ModelParams global, std::span<const Sample> holdout,
                                const FederatedOptions& options, RoundReport report,
                                std::chrono::steady_clock::time_point started) {
  const Evaluation eval = evaluate(global, holdout, options.norm, options.eta);
  report.round = state.round + 1;
  report.prediction_error_m = eval.prediction_error_m;
  report.prediction_accuracy = eval.prediction_accuracy;
  report.accuracy_by_type = eval.accuracy_by_type;
  report.eval_loss = eval.loss;
  report.eval_samples = eval.samples;
  report.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  RoundResult out{{std::move(global), eval.prediction_accuracy, state.round + 1}, std::move(report)};
  return out;
}

inline double mean_train_loss(std::span<const LocalUpdate> updates) {
  double s = 0.0;
  for (const auto& u : updates) s += u.train_loss;
  return s / static_cast<double>(updates.size());
}

inline RoundResult federated_round(const FederationState& state, std::span<const Client> clients,
                                   std::span<const Sample> holdout, const FederatedOptions& options,
                                   AggregationMode mode, const char* method) {
  if (clients.empty()) throw DomainError("a round needs at least one client");
  const auto started = std::chrono::steady_clock::now();
  const auto updates = train_clients(state.global, clients, state.round, options);
  std::vector<double> lambda;
  if (mode == AggregationMode::MrEWeighted) {
    lambda = mre_weights(updates, options.xi);
  } else {
    lambda.assign(updates.size(), 1.0 / static_cast<double>(updates.size()));
  }
  RoundReport report;
  report.method = method;
  report.mode = mode;
  report.lambda = lambda;
  report.loss = mean_train_loss(updates);
  return finish_round(state, aggregate(updates, lambda), holdout, options, std::move(report), started);
}

}  // namespace detail

/// Local training on every client, gate, MrE or uniform weighting,
/// aggregation, and evaluation of the new global model on the hold-out set.
inline RoundResult run_flt_round(const FederationState& state, std::span<const Client> clients,
                                 std::span<const Sample> holdout, const FederatedOptions& options, Rng& gate_rng) {
  const AggregationMode mode = decide_mode(options.gate, state.global_accuracy, gate_rng);
  return detail::federated_round(state, clients, holdout, options, mode, "fl-tp");
}

inline RoundResult run_fedavg_round(const FederationState& state, std::span<const Client> clients,
                                    std::span<const Sample> holdout, const FederatedOptions& options) {
  return detail::federated_round(state, clients, holdout, options, AggregationMode::UniformAverage, "fed-avg");
}

/// Trains one model on the pooled data.
inline TrainResult run_centralized(const ModelParams& initial, std::span<const Sample> pooled,
                                   const TrainOptions& options, Rng& rng) {
  return train_local(initial, pooled, options, rng);
}

/// One reporting period of centralized training: `train.episodes` passes over
/// the pooled data, using the same stream key as client 0 so that a
/// single-vehicle FedAvg run coincides with it.
inline RoundResult run_centralized_round(const FederationState& state, std::span<const Sample> pooled,
                                         std::span<const Sample> holdout, const FederatedOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  Rng rng = local_rng(options, state.round, 0);
  auto trained = run_centralized(state.global, pooled, options.train, rng);
  RoundReport report;
  report.method = "centralized";
  report.mode = AggregationMode::Pooled;
  report.lambda = {1.0};
  report.loss = trained.final_loss;
  return detail::finish_round(state, std::move(trained.params), holdout, options, std::move(report), started);
}

}  // namespace fltp
