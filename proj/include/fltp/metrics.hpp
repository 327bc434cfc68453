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

// Trajectory error, attack-judgment accuracy, and per-round reports.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fltp/errors.hpp"
#include "fltp/feature_pipeline.hpp"
#include "fltp/lstm.hpp"

namespace fltp {

inline constexpr double kDefaultJudgmentThreshold = 0.5;

enum class AggregationMode { UniformAverage, MrEWeighted, Pooled };

constexpr std::string_view to_string(AggregationMode m) noexcept {
  switch (m) {
    case AggregationMode::UniformAverage: return "uniform";
    case AggregationMode::MrEWeighted: return "mre";
    case AggregationMode::Pooled: return "pooled";
  }
  return "unknown";
}

struct RoundReport {
  int round = 0;
  std::string method;
  double prediction_error_m = 0.0;
  double prediction_accuracy = 0.0;
  /// Indexed by attacker code; empty when the evaluation set has no samples
  /// of that type.
  std::array<std::optional<double>, kAttackerTypeCount> accuracy_by_type{};
  AggregationMode mode = AggregationMode::UniformAverage;
  std::vector<double> lambda;
  double loss = 0.0;  // mean local training loss of the round
  double eval_loss = 0.0;
  std::size_t eval_samples = 0;
  double wallclock_s = 0.0;
};

/// Mean Euclidean distance in meters; every predicted step of every sample is
/// one term.
inline double prediction_error(std::span<const Prediction> preds, std::span<const LabelBlock> labels,
                               const NormalizationSpec& spec) {
  if (preds.empty()) throw DomainError("prediction error of an empty set");
  if (preds.size() != labels.size()) throw ContractViolation("prediction and label counts differ");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t n = 0; n < kHorizon; ++n) {
      const Point2 p = denormalize_pos({preds[i].loc_x(n), preds[i].loc_y(n)}, spec);
      const Point2 l = denormalize_pos({labels[i].loc_x(n), labels[i].loc_y(n)}, spec);
      total += std::sqrt((p.x - l.x) * (p.x - l.x) + (p.y - l.y) * (p.y - l.y));
    }
  }
  return total / static_cast<double>(preds.size() * kHorizon);
}

/// True iff |atk_pdt - atk_lb| < eta; a tie is a false judgment.
constexpr bool attack_judgment(double atk_pdt, double atk_lb, double eta = kDefaultJudgmentThreshold) noexcept {
  const double d = atk_pdt - atk_lb;
  return (d < 0 ? -d : d) < eta;
}

/// TJ / (TJ + FJ) over any range of judgments.
template <std::ranges::sized_range R>
double prediction_accuracy(const R& judgments) {
  if (std::ranges::empty(judgments)) throw DomainError("accuracy of no judgments");
  std::size_t true_count = 0;
  for (bool j : judgments) true_count += j ? 1 : 0;
  return static_cast<double>(true_count) / static_cast<double>(std::ranges::size(judgments));
}

/// One judgment per predicted step of each sample.
inline std::vector<bool> judge_all(std::span<const Prediction> preds, std::span<const LabelBlock> labels,
                                   double eta = kDefaultJudgmentThreshold) {
  if (preds.size() != labels.size()) throw ContractViolation("prediction and label counts differ");
  std::vector<bool> out;
  out.reserve(preds.size() * kHorizon);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t n = 0; n < kHorizon; ++n) out.push_back(attack_judgment(preds[i].atk(n), labels[i].atk(n), eta));
  }
  return out;
}

struct Evaluation {
  double prediction_error_m = 0.0;
  double prediction_accuracy = 0.0;
  std::array<std::optional<double>, kAttackerTypeCount> accuracy_by_type{};
  double loss = 0.0;
  std::size_t samples = 0;
};

inline Evaluation evaluate(const ModelParams& params, std::span<const Sample> samples, const NormalizationSpec& spec,
                           double eta = kDefaultJudgmentThreshold) {
  if (samples.empty()) throw DomainError("evaluation set is empty");
  std::vector<Prediction> preds;
  std::vector<LabelBlock> labels;
  preds.reserve(samples.size());
  labels.reserve(samples.size());
  std::array<std::size_t, kAttackerTypeCount> hits{}, totals{};
  for (const Sample& s : samples) {
    preds.push_back(forward(params, s.input));
    labels.push_back(s.label);
    const auto type = static_cast<std::size_t>(code(s.sender_type));
    for (std::size_t n = 0; n < kHorizon; ++n) {
      totals[type] += 1;
      hits[type] += attack_judgment(preds.back().atk(n), s.label.atk(n), eta) ? 1 : 0;
    }
  }
  Evaluation e;
  e.samples = samples.size();
  e.prediction_error_m = prediction_error(preds, labels, spec);
  e.prediction_accuracy = prediction_accuracy(judge_all(preds, labels, eta));
  for (std::size_t t = 0; t < kAttackerTypeCount; ++t) {
    if (totals[t] > 0) e.accuracy_by_type[t] = static_cast<double>(hits[t]) / static_cast<double>(totals[t]);
  }
  e.loss = loss(preds, labels);
  return e;
}

struct MetricSummary {
  double mean = 0.0;
  std::optional<double> stddev;  // sample std; absent for fewer than two values
  std::size_t count = 0;
};

inline MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw DomainError("nothing to summarize");
  MetricSummary s;
  s.count = values.size();
  // Shifted by the first value so that identical inputs give their value
  // back exactly and a zero spread.
  const double ref = values.front();
  double shift = 0.0;
  for (double v : values) shift += v - ref;
  s.mean = ref + shift / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

struct ReportSummary {
  MetricSummary accuracy;
  MetricSummary error_m;
};

inline ReportSummary summarize(std::span<const RoundReport> reports) {
  std::vector<double> acc, err;
  for (const auto& r : reports) {
    acc.push_back(r.prediction_accuracy);
    err.push_back(r.prediction_error_m);
  }
  return {summarize(std::span<const double>(acc)), summarize(std::span<const double>(err))};
}

}  // namespace fltp
