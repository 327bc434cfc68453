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

// Command-line front end:
//   fltp run --config <path> [--profile desk|paper] [--seed <u64>] [--out <dir>] [--threads <n>]
//   fltp summarize --in <dir> --out <file>

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fltp/config.hpp"
#include "fltp/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Federated trajectory prediction under message-falsification attacks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string profile_name = "desk";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the configured sweep");
  run->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--profile", profile_name, "Defaults profile")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--quiet", quiet, "Suppress progress output");

  std::string in_dir, out_file;
  auto* summarize = app.add_subcommand("summarize", "Rebuild the summary table from round files");
  summarize->add_option("--in", in_dir, "Directory written by run")->required()->check(CLI::ExistingDirectory);
  summarize->add_option("--out", out_file, "Summary CSV to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto profile = profile_name == "paper" ? fltp::Profile::Paper : fltp::Profile::Desk;
      auto config = fltp::load_config(config_path, profile);
      if (seed) config.master_seed = *seed;
      if (out_dir) config.output_dir = *out_dir;
      if (threads) config.threads = *threads;
      fltp::validate(config);
      auto log = [quiet](const std::string& msg) {
        if (!quiet) std::cerr << msg << '\n';
      };
      const auto output = fltp::run_experiment(config, log);
      std::cout << "wrote " << output.round_files.size() << " round files and " << output.summary_file.string()
                << '\n';
    } else if (*summarize) {
      const auto rows = fltp::summarize_directory(in_dir, out_file);
      std::cout << "wrote " << rows.size() << " summary rows to " << out_file << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
