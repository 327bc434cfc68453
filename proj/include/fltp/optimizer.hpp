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

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fltp/errors.hpp"
#include "fltp/lstm.hpp"
#include "fltp/rng.hpp"

namespace fltp {

struct SgdMomentum {
  double learning_rate = 1e-5;
  double momentum = 0.5;
  friend bool operator==(const SgdMomentum&, const SgdMomentum&) = default;
};

struct OptimizerState {
  SgdMomentum hyper;
  std::vector<double> velocity;

  OptimizerState() = default;
  OptimizerState(SgdMomentum h, std::size_t n) : hyper(h), velocity(n, 0.0) {}
};

/// Classic momentum: v <- mu * v + g; theta <- theta - lr * v.
inline void sgd_step(ModelParams& params, OptimizerState& opt, std::span<const double> grad) {
  if (grad.size() != params.size() || opt.velocity.size() != params.size()) {
    throw ContractViolation("optimizer shapes do not match parameters");
  }
  auto theta = params.mutable_values();
  const double mu = opt.hyper.momentum;
  const double lr = opt.hyper.learning_rate;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    opt.velocity[i] = mu * opt.velocity[i] + grad[i];
    theta[i] -= lr * opt.velocity[i];
  }
}

struct TrainOptions {
  int episodes = 10;
  std::size_t batch_size = 128;
  SgdMomentum sgd;
  friend bool operator==(const TrainOptions&, const TrainOptions&) = default;
};

struct TrainResult {
  ModelParams params;
  /// Sample-weighted mean batch loss over the last episode (NaN if no
  /// episode ran).
  double final_loss = 0.0;
};

/// Mini-batch SGD with momentum over shuffled passes. Deterministic in rng.
/// The optimizer state starts at zero on every call.
inline TrainResult train_local(const ModelParams& initial, std::span<const Sample> dataset,
                               const TrainOptions& options, Rng& rng) {
  if (dataset.empty()) throw DomainError("local dataset is empty");
  if (options.batch_size == 0) throw DomainError("batch size must be positive");
  TrainResult result{initial, std::numeric_limits<double>::quiet_NaN()};
  OptimizerState opt(options.sgd, initial.size());
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int episode = 0; episode < options.episodes; ++episode) {
    rng.shuffle(std::span<std::size_t>(order));
    double weighted = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      const auto g = batch_gradient(result.params, dataset, batch);
      weighted += g.loss * static_cast<double>(batch.size());
      sgd_step(result.params, opt, g.grad);
    }
    result.final_loss = weighted / static_cast<double>(order.size());
  }
  return result;
}

}  // namespace fltp
