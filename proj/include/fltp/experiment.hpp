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

// Sweep execution, per-run CSV persistence, and the summary table.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "fltp/checkpoint.hpp"
#include "fltp/config.hpp"
#include "fltp/federated.hpp"
#include "fltp/metrics.hpp"
#include "fltp/parallel.hpp"
#include "fltp/traffic.hpp"

namespace fltp {

inline constexpr const char* kRoundCsvHeader =
    "run_id,method,penetration,n_vehicles,repeat,round,mode,pred_error_m,atk_accuracy,loss,wallclock_s";

inline constexpr const char* kSummaryCsvHeader =
    "method,penetration,n_vehicles,repeats,accuracy_mean,accuracy_std,error_mean_m,error_std_m,"
    "acc_improvement_vs_centralized_pct,err_improvement_vs_centralized_pct,"
    "acc_improvement_min_pct,err_improvement_min_pct";

namespace detail {

/// Shortest round-trip decimal form, independent of locale.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string fmt_fixed(double v, int precision) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, ptr);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Identifies one run of a sweep.
struct RunKey {
  Method method = Method::FlTp;
  std::size_t penetration_index = 0;
  std::size_t vehicle_index = 0;
  int repeat = 0;
};

/// Seed of a sweep cell. Independent of the method, so all methods in a
/// cell see the same traffic, attacks, and initial model.
inline std::uint64_t cell_seed(std::uint64_t master, std::size_t penetration_index, std::size_t vehicle_index,
                               int repeat) {
  return derive_seed(master, {penetration_index, vehicle_index, static_cast<std::uint64_t>(repeat)});
}

inline std::string run_id(Method m, double penetration, int n_vehicles, int repeat) {
  return std::string(to_string(m)) + "_p" + detail::fmt_fixed(penetration, 2) + "_n" + std::to_string(n_vehicles) +
         "_r" + std::to_string(repeat);
}

/// Everything a method needs for one cell, built once and shared.
struct CellData {
  Scenario scenario;
  std::vector<VehicleDataset> datasets;
  std::vector<Sample> pooled_train;
  std::vector<Sample> holdout;
  ModelParams initial;
  std::uint64_t federated_seed = 0;
  std::uint64_t gate_seed = 0;
};

inline CellData prepare_cell(const ExperimentConfig& config, double penetration, int n_vehicles, std::uint64_t seed) {
  CellData cell;
  ScenarioConfig sc = config.scenario;
  sc.n_vehicles = n_vehicles;
  sc.penetration = penetration;
  sc.rng_seed = derive_seed(seed, {1});
  cell.scenario = generate_scenario(sc);
  const auto logs = simulate_receptions(cell.scenario, config.attack, derive_seed(seed, {2}));
  cell.datasets = build_datasets(cell.scenario, logs, config.normalization(), config.holdout_steps);
  for (const auto& d : cell.datasets) {
    cell.pooled_train.insert(cell.pooled_train.end(), d.train.begin(), d.train.end());
    cell.holdout.insert(cell.holdout.end(), d.holdout.begin(), d.holdout.end());
  }
  Rng init_rng(derive_seed(seed, {3}));
  cell.initial = init_params(config.model.hidden_size, init_rng);
  cell.federated_seed = derive_seed(seed, {4});
  cell.gate_seed = derive_seed(seed, {5});
  return cell;
}

inline FederatedOptions federated_options(const ExperimentConfig& config, std::uint64_t seed) {
  FederatedOptions o;
  o.train = config.train_options();
  o.gate = config.gate;
  o.xi = config.xi;
  o.norm = config.normalization();
  o.seed = seed;
  o.threads = 1;
  return o;
}

/// Round loop of one method on one prepared cell. `on_round` sees every
/// result in order.
inline std::vector<RoundReport> run_method(Method method, const ExperimentConfig& config, const CellData& cell,
                                           const std::function<void(const RoundResult&)>& on_round = {}) {
  const FederatedOptions options = federated_options(config, cell.federated_seed);
  std::vector<Client> clients;
  for (const auto& d : cell.datasets) {
    clients.push_back({d.vehicle_id, static_cast<std::uint64_t>(d.vehicle_id), d.train});
  }
  Rng gate_rng(cell.gate_seed);
  FederationState state{cell.initial, 0.0, 0};
  std::vector<RoundReport> reports;
  for (int r = 0; r < config.model.global_rounds; ++r) {
    RoundResult result;
    switch (method) {
      case Method::FlTp: result = run_flt_round(state, clients, cell.holdout, options, gate_rng); break;
      case Method::FedAvg: result = run_fedavg_round(state, clients, cell.holdout, options); break;
      case Method::Centralized: result = run_centralized_round(state, cell.pooled_train, cell.holdout, options); break;
    }
    if (on_round) on_round(result);
    reports.push_back(result.report);
    state = std::move(result.next);
  }
  return reports;
}

inline std::string round_csv_row(const std::string& id, Method method, double penetration, int n_vehicles,
                                 int repeat, const RoundReport& r, bool record_wallclock) {
  std::ostringstream row;
  row << id << ',' << to_string(method) << ',' << detail::fmt(penetration) << ',' << n_vehicles << ',' << repeat
      << ',' << r.round << ',' << to_string(r.mode) << ',' << detail::fmt(r.prediction_error_m) << ','
      << detail::fmt(r.prediction_accuracy) << ',' << detail::fmt(r.loss) << ','
      << detail::fmt(record_wallclock ? r.wallclock_s : 0.0);
  return row.str();
}

inline nlohmann::json round_sidecar(const RoundReport& r) {
  nlohmann::json j;
  j["round"] = r.round;
  j["method"] = r.method;
  j["mode"] = std::string(to_string(r.mode));
  j["lambda"] = r.lambda;
  j["prediction_error_m"] = r.prediction_error_m;
  j["prediction_accuracy"] = r.prediction_accuracy;
  j["loss"] = r.loss;
  j["eval_loss"] = r.eval_loss;
  j["eval_samples"] = r.eval_samples;
  nlohmann::json by_type = nlohmann::json::object();
  for (std::size_t t = 0; t < kAttackerTypeCount; ++t) {
    if (r.accuracy_by_type[t]) by_type[std::string(to_string(static_cast<AttackerType>(t)))] = *r.accuracy_by_type[t];
  }
  j["accuracy_by_type"] = by_type;
  return j;
}

/// Final-round metrics of one run, as read back from its round file.
struct FinalResult {
  std::string method;
  double penetration = 0.0;
  int n_vehicles = 0;
  int repeat = 0;
  int round = 0;
  double accuracy = 0.0;
  double error_m = 0.0;
};

struct SummaryRow {
  std::string method;
  double penetration = 0.0;
  int n_vehicles = 0;
  MetricSummary accuracy;
  MetricSummary error_m;
  std::optional<double> acc_improvement_vs_centralized;  // percent
  std::optional<double> err_improvement_vs_centralized;
  std::optional<double> acc_improvement_min;  // versus the best other method
  std::optional<double> err_improvement_min;
};

/// Relative accuracy gain in percent: (acc - reference) / reference.
inline double accuracy_improvement(double accuracy, double reference) {
  return (accuracy - reference) / reference * 100.0;
}

/// Relative error reduction in percent: (reference - error) / reference.
inline double error_improvement(double error, double reference) { return (reference - error) / reference * 100.0; }

inline std::vector<SummaryRow> export_summary(std::span<const FinalResult> results) {
  using Cell = std::tuple<double, int, std::string>;
  std::map<Cell, std::vector<const FinalResult*>> cells;
  for (const auto& r : results) cells[{r.penetration, r.n_vehicles, r.method}].push_back(&r);

  std::vector<SummaryRow> rows;
  for (const auto& [cell, members] : cells) {
    SummaryRow row;
    std::tie(row.penetration, row.n_vehicles, row.method) = cell;
    std::vector<double> acc, err;
    for (const auto* m : members) {
      acc.push_back(m->accuracy);
      err.push_back(m->error_m);
    }
    row.accuracy = summarize(std::span<const double>(acc));
    row.error_m = summarize(std::span<const double>(err));
    rows.push_back(row);
  }
  for (auto& row : rows) {
    std::optional<double> best_acc, best_err;
    for (const auto& other : rows) {
      if (other.penetration != row.penetration || other.n_vehicles != row.n_vehicles) continue;
      if (other.method == "centralized") {
        row.acc_improvement_vs_centralized = accuracy_improvement(row.accuracy.mean, other.accuracy.mean);
        row.err_improvement_vs_centralized = error_improvement(row.error_m.mean, other.error_m.mean);
      }
      if (other.method == row.method) continue;
      best_acc = std::max(best_acc.value_or(other.accuracy.mean), other.accuracy.mean);
      best_err = std::min(best_err.value_or(other.error_m.mean), other.error_m.mean);
    }
    if (best_acc) row.acc_improvement_min = accuracy_improvement(row.accuracy.mean, *best_acc);
    if (best_err) row.err_improvement_min = error_improvement(row.error_m.mean, *best_err);
  }
  return rows;
}

inline void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto opt = [](const std::optional<double>& v) { return v ? detail::fmt(*v) : std::string("NA"); };
  out << kSummaryCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << detail::fmt(r.penetration) << ',' << r.n_vehicles << ',' << r.accuracy.count << ','
        << detail::fmt(r.accuracy.mean) << ',' << opt(r.accuracy.stddev) << ',' << detail::fmt(r.error_m.mean)
        << ',' << opt(r.error_m.stddev) << ',' << opt(r.acc_improvement_vs_centralized) << ','
        << opt(r.err_improvement_vs_centralized) << ',' << opt(r.acc_improvement_min) << ','
        << opt(r.err_improvement_min) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Reads every round file under `dir/rounds` and keeps each run's last round.
inline std::vector<FinalResult> read_final_results(const std::filesystem::path& dir) {
  const auto rounds_dir = dir / "rounds";
  if (!std::filesystem::is_directory(rounds_dir)) {
    throw std::runtime_error("no rounds directory under " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(rounds_dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<FinalResult> out;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != kRoundCsvHeader) {
      throw std::runtime_error("unexpected header in " + file.string());
    }
    std::optional<FinalResult> last;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto cells = detail::split_csv(line);
      if (cells.size() != 11) {
        throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": expected 11 columns");
      }
      try {
        FinalResult r;
        r.method = cells[1];
        r.penetration = std::stod(cells[2]);
        r.n_vehicles = std::stoi(cells[3]);
        r.repeat = std::stoi(cells[4]);
        r.round = std::stoi(cells[5]);
        r.error_m = std::stod(cells[7]);
        r.accuracy = std::stod(cells[8]);
        if (!last || r.round >= last->round) last = r;
      } catch (const std::logic_error&) {
        throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": malformed number");
      }
    }
    if (last) out.push_back(*last);
  }
  return out;
}

inline std::vector<SummaryRow> summarize_directory(const std::filesystem::path& in_dir,
                                                   const std::filesystem::path& out_file) {
  const auto finals = read_final_results(in_dir);
  auto rows = export_summary(finals);
  write_summary_csv(out_file, rows);
  return rows;
}

struct ExperimentOutput {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> round_files;
  std::filesystem::path summary_file;
  std::vector<SummaryRow> summary;
};

/// Runs every (method x penetration x vehicle count x repeat) combination.
/// Each run writes its own round CSV and a final checkpoint; the summary is
/// produced from the written files once all runs finish.
inline ExperimentOutput run_experiment(const ExperimentConfig& config,
                                       const std::function<void(const std::string&)>& log = {}) {
  validate(config);
  namespace fs = std::filesystem;
  ExperimentOutput output;
  output.directory = config.output_dir;
  const fs::path rounds_dir = output.directory / "rounds";
  const fs::path ckpt_dir = output.directory / "checkpoints";
  std::error_code ec;
  fs::create_directories(rounds_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + rounds_dir.string() + ": " + ec.message());
  fs::create_directories(ckpt_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + ckpt_dir.string() + ": " + ec.message());

  struct CellIndex {
    std::size_t p, v;
    int repeat;
  };
  std::vector<CellIndex> cells;
  for (std::size_t p = 0; p < config.penetrations.size(); ++p) {
    for (std::size_t v = 0; v < config.vehicle_counts.size(); ++v) {
      for (int rep = 0; rep < config.repeats; ++rep) cells.push_back({p, v, rep});
    }
  }

  std::vector<std::vector<fs::path>> written(cells.size());
  parallel_for(cells.size(), static_cast<std::size_t>(config.threads), [&](std::size_t i) {
    const auto [p, v, rep] = cells[i];
    const double penetration = config.penetrations[p];
    const int n_vehicles = config.vehicle_counts[v];
    const CellData cell = prepare_cell(config, penetration, n_vehicles, cell_seed(config.master_seed, p, v, rep));
    for (Method method : config.methods) {
      const std::string id = run_id(method, penetration, n_vehicles, rep);
      const fs::path csv_path = rounds_dir / (id + ".csv");
      std::ofstream csv(csv_path);
      if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
      csv << kRoundCsvHeader << '\n';
      run_method(method, config, cell, [&](const RoundResult& result) {
        const RoundReport& r = result.report;
        csv << round_csv_row(id, method, penetration, n_vehicles, rep, r, config.record_wallclock) << '\n';
        const bool final_round = r.round == config.model.global_rounds;
        const bool periodic = config.checkpoint_every > 0 && r.round % config.checkpoint_every == 0;
        if (final_round || periodic) {
          const std::string stem = id + "_round" + std::to_string(r.round);
          save_checkpoint((ckpt_dir / (stem + ".bin")).string(), result.next.global);
          std::ofstream side(ckpt_dir / (stem + ".json"));
          if (!side) throw std::runtime_error("cannot write " + (ckpt_dir / (stem + ".json")).string());
          side << round_sidecar(r).dump(2) << '\n';
        }
      });
      if (!csv) throw std::runtime_error("write failed: " + csv_path.string());
      written[i].push_back(csv_path);
      if (log) log("finished " + id);
    }
  });
  for (auto& files : written) output.round_files.insert(output.round_files.end(), files.begin(), files.end());

  output.summary_file = output.directory / "summary.csv";
  output.summary = summarize_directory(output.directory, output.summary_file);
  return output;
}

}  // namespace fltp
