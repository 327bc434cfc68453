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

// Single-layer LSTM encoder with a linear head over the final hidden state.
// Forward and backward passes are written out by hand.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fltp/errors.hpp"
#include "fltp/feature_pipeline.hpp"
#include "fltp/rng.hpp"

namespace fltp {

using Prediction = HorizonBlock;

/// Flat parameter vector with named blocks, in this order:
///   input weights     4H x 9   (gate rows i, f, g, o)
///   recurrent weights 4H x H
///   gate bias         4H
///   head weights      15 x H
///   head bias         15
class ModelParams {
 public:
  static constexpr std::size_t flat_size(std::size_t hidden) noexcept {
    return 4 * (kFeatureCount * hidden + hidden * hidden + hidden) + (hidden * kOutputSize + kOutputSize);
  }

  ModelParams() = default;
  explicit ModelParams(std::size_t hidden) : hidden_(hidden), values_(flat_size(hidden), 0.0) {
    if (hidden == 0) throw DomainError("hidden size must be positive");
  }

  static ModelParams from_flat(std::size_t hidden, std::vector<double> values) {
    if (values.size() != flat_size(hidden)) throw ContractViolation("flat vector length does not match hidden size");
    ModelParams p(hidden);
    p.values_ = std::move(values);
    return p;
  }

  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> flatten() const { return values_; }

  /// Mutable access invalidates forward caches taken on this object.
  std::span<double> mutable_values() noexcept {
    ++revision_;
    return values_;
  }
  std::uint64_t revision() const noexcept { return revision_; }

  std::size_t input_weights_offset() const noexcept { return 0; }
  std::size_t recurrent_weights_offset() const noexcept { return 4 * hidden_ * kFeatureCount; }
  std::size_t gate_bias_offset() const noexcept { return recurrent_weights_offset() + 4 * hidden_ * hidden_; }
  std::size_t head_weights_offset() const noexcept { return gate_bias_offset() + 4 * hidden_; }
  std::size_t head_bias_offset() const noexcept { return head_weights_offset() + kOutputSize * hidden_; }

  const double* input_weights() const noexcept { return values_.data() + input_weights_offset(); }
  const double* recurrent_weights() const noexcept { return values_.data() + recurrent_weights_offset(); }
  const double* gate_bias() const noexcept { return values_.data() + gate_bias_offset(); }
  const double* head_weights() const noexcept { return values_.data() + head_weights_offset(); }
  const double* head_bias() const noexcept { return values_.data() + head_bias_offset(); }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.hidden_ == b.hidden_ && a.values_ == b.values_;
  }

 private:
  std::size_t hidden_ = 0;
  std::vector<double> values_;
  std::uint64_t revision_ = 0;
};

/// Uniform in [-1/sqrt(H), 1/sqrt(H)].
inline ModelParams init_params(std::size_t hidden, Rng& rng) {
  ModelParams p(hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& v : p.mutable_values()) v = rng.uniform(-bound, bound);
  return p;
}

/// Activations kept by forward() for backward().
struct ForwardCache {
  const ModelParams* params = nullptr;
  std::uint64_t revision = 0;
  FeatureWindow input;
  std::vector<double> gates;   // [step][4H], post-activation
  std::vector<double> cells;   // [step + 1][H], row 0 is the zero initial state
  std::vector<double> hidden;  // [step + 1][H]
  Prediction output;
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace detail

inline Prediction forward(const ModelParams& params, const FeatureWindow& window, ForwardCache* cache = nullptr) {
  for (double v : window.values) {
    if (!std::isfinite(v)) throw DomainError("non-finite model input");
  }
  const std::size_t h = params.hidden();
  const std::size_t g4 = 4 * h;
  const double* wx = params.input_weights();
  const double* wh = params.recurrent_weights();
  const double* b = params.gate_bias();

  std::vector<double> local_gates, local_cells, local_hidden;
  std::vector<double>& gates = cache ? cache->gates : local_gates;
  std::vector<double>& cells = cache ? cache->cells : local_cells;
  std::vector<double>& hid = cache ? cache->hidden : local_hidden;
  gates.assign(kInputSteps * g4, 0.0);
  cells.assign((kInputSteps + 1) * h, 0.0);
  hid.assign((kInputSteps + 1) * h, 0.0);

  for (std::size_t t = 0; t < kInputSteps; ++t) {
    const auto x = window.row(t);
    const double* h_prev = hid.data() + t * h;
    const double* c_prev = cells.data() + t * h;
    double* z = gates.data() + t * g4;
    for (std::size_t r = 0; r < g4; ++r) {
      double acc = b[r];
      const double* wxr = wx + r * kFeatureCount;
      for (std::size_t k = 0; k < kFeatureCount; ++k) acc += wxr[k] * x[k];
      const double* whr = wh + r * h;
      for (std::size_t k = 0; k < h; ++k) acc += whr[k] * h_prev[k];
      z[r] = acc;
    }
    double* c = cells.data() + (t + 1) * h;
    double* hn = hid.data() + (t + 1) * h;
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = detail::sigmoid(z[j]);
      const double fg = detail::sigmoid(z[h + j]);
      const double cg = std::tanh(z[2 * h + j]);
      const double og = detail::sigmoid(z[3 * h + j]);
      z[j] = ig;
      z[h + j] = fg;
      z[2 * h + j] = cg;
      z[3 * h + j] = og;
      c[j] = fg * c_prev[j] + ig * cg;
      hn[j] = og * std::tanh(c[j]);
    }
  }

  Prediction out;
  const double* wy = params.head_weights();
  const double* by = params.head_bias();
  const double* h_last = hid.data() + kInputSteps * h;
  for (std::size_t o = 0; o < kOutputSize; ++o) {
    double acc = by[o];
    const double* row = wy + o * h;
    for (std::size_t k = 0; k < h; ++k) acc += row[k] * h_last[k];
    out.values[o] = acc;
  }
  if (cache) {
    cache->params = &params;
    cache->revision = params.revision();
    cache->input = window;
    cache->output = out;
  }
  return out;
}

/// Sum over the five steps of squared position error plus squared attack
/// code error, averaged over the batch.
inline double loss(std::span<const Prediction> preds, std::span<const LabelBlock> labels) {
  if (preds.empty()) throw DomainError("loss of an empty batch");
  if (preds.size() != labels.size()) throw ContractViolation("prediction and label counts differ");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t o = 0; o < kOutputSize; ++o) {
      const double r = preds[i].values[o] - labels[i].values[o];
      total += r * r;
    }
  }
  return total / static_cast<double>(preds.size());
}

/// Adds scale * d(per-sample squared error)/d(params) into grad.
inline void accumulate_gradient(const ForwardCache& cache, const LabelBlock& label, double scale,
                                std::span<double> grad) {
  const ModelParams* params = cache.params;
  if (params == nullptr || cache.revision != params->revision()) {
    throw ContractViolation("forward cache is stale");
  }
  if (grad.size() != params->size()) throw ContractViolation("gradient buffer has wrong length");
  const std::size_t h = params->hidden();
  const std::size_t g4 = 4 * h;
  const double* wh = params->recurrent_weights();
  const double* wy = params->head_weights();

  double* g_wx = grad.data() + params->input_weights_offset();
  double* g_wh = grad.data() + params->recurrent_weights_offset();
  double* g_b = grad.data() + params->gate_bias_offset();
  double* g_wy = grad.data() + params->head_weights_offset();
  double* g_by = grad.data() + params->head_bias_offset();

  std::array<double, kOutputSize> dy{};
  for (std::size_t o = 0; o < kOutputSize; ++o) {
    dy[o] = 2.0 * scale * (cache.output.values[o] - label.values[o]);
  }

  std::vector<double> dh(h, 0.0), dc(h, 0.0), dz(g4, 0.0), dh_prev(h, 0.0);
  const double* h_last = cache.hidden.data() + kInputSteps * h;
  for (std::size_t o = 0; o < kOutputSize; ++o) {
    g_by[o] += dy[o];
    double* gw = g_wy + o * h;
    const double* w = wy + o * h;
    for (std::size_t k = 0; k < h; ++k) {
      gw[k] += dy[o] * h_last[k];
      dh[k] += w[k] * dy[o];
    }
  }

  for (std::size_t t = kInputSteps; t-- > 0;) {
    const double* gate = cache.gates.data() + t * g4;
    const double* c = cache.cells.data() + (t + 1) * h;
    const double* c_prev = cache.cells.data() + t * h;
    const double* h_prev = cache.hidden.data() + t * h;
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = gate[j], fg = gate[h + j], cg = gate[2 * h + j], og = gate[3 * h + j];
      const double tc = std::tanh(c[j]);
      const double d_o = dh[j] * tc;
      const double d_c = dc[j] + dh[j] * og * (1.0 - tc * tc);
      dz[j] = d_c * cg * ig * (1.0 - ig);
      dz[h + j] = d_c * c_prev[j] * fg * (1.0 - fg);
      dz[2 * h + j] = d_c * ig * (1.0 - cg * cg);
      dz[3 * h + j] = d_o * og * (1.0 - og);
      dc[j] = d_c * fg;
    }
    const auto x = cache.input.row(t);
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (std::size_t r = 0; r < g4; ++r) {
      const double d = dz[r];
      g_b[r] += d;
      double* gx = g_wx + r * kFeatureCount;
      for (std::size_t k = 0; k < kFeatureCount; ++k) gx[k] += d * x[k];
      double* gh = g_wh + r * h;
      const double* w = wh + r * h;
      for (std::size_t k = 0; k < h; ++k) {
        gh[k] += d * h_prev[k];
        dh_prev[k] += w[k] * d;
      }
    }
    dh.swap(dh_prev);
  }
}

/// Gradient of the single-sample loss.
inline std::vector<double> backward(const ForwardCache& cache, const LabelBlock& label) {
  if (cache.params == nullptr) throw ContractViolation("forward cache is empty");
  std::vector<double> grad(cache.params->size(), 0.0);
  accumulate_gradient(cache, label, 1.0, grad);
  return grad;
}

struct BatchGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Mean loss and its gradient over the selected samples.
inline BatchGradient batch_gradient(const ModelParams& params, std::span<const Sample> samples,
                                    std::span<const std::size_t> indices) {
  if (indices.empty()) throw DomainError("gradient of an empty batch");
  BatchGradient out;
  out.grad.assign(params.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(indices.size());
  ForwardCache cache;
  for (std::size_t idx : indices) {
    const Sample& s = samples[idx];
    const Prediction p = forward(params, s.input, &cache);
    for (std::size_t o = 0; o < kOutputSize; ++o) {
      const double r = p.values[o] - s.label.values[o];
      out.loss += r * r;
    }
    accumulate_gradient(cache, s.label, scale, out.grad);
  }
  out.loss *= scale;
  return out;
}

inline double dataset_loss(const ModelParams& params, std::span<const Sample> samples) {
  if (samples.empty()) throw DomainError("loss of an empty dataset");
  double total = 0.0;
  for (const Sample& s : samples) {
    const Prediction p = forward(params, s.input);
    for (std::size_t o = 0; o < kOutputSize; ++o) {
      const double r = p.values[o] - s.label.values[o];
      total += r * r;
    }
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace fltp
