// Copyright 2026 The coinbayes Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "coinbayes/fitting.hpp"
#include "coinbayes/oracle.hpp"
#include "coinbayes/trajectory.hpp"

namespace coinbayes {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

enum class ExperimentKind { kBiasSweep, kIclSweep, kChangepoint, kGammaFit, kAttentionCorr };

std::string_view to_string(ExperimentKind kind);
/// "bias-sweep", "icl-sweep", "changepoint", "gamma-fit", "attention-corr".
ExperimentKind parse_experiment_kind(std::string_view name);

struct ProviderConfig {
  std::string endpoint;
  std::string cache;
  bool replay_only = false;
  std::size_t max_in_flight = 4;
  /// One per outcome; empty means " <label>".
  std::vector<std::string> continuations;
};

/// Every effective parameter of a run. Defaults are filled in on load and the
/// whole struct is written back out, so a run record is self-describing.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kBiasSweep;
  /// Predictor specs ("exact_bayes", "discounted_bayes:gamma=0.5", "remote").
  std::vector<std::string> predictors;
  std::vector<std::string> outcome_space{"heads", "tails"};
  std::vector<double> bias_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t bias_outcome = 0;
  std::vector<std::size_t> icl_counts{0, 1, 3, 5, 10, 30, 50, 100};
  /// Prefix in-context sweeps with the biasing statement for the target theta.
  bool icl_bias_statement = true;
  ChangepointSpec trajectory = default_changepoint();
  /// Switchover points K to sweep; empty runs `trajectory` as given.
  std::vector<std::size_t> switchover_sweep;
  /// Discounted-filter columns emitted next to the classical filter.
  std::vector<double> discount_gammas{0.5};
  std::optional<std::uint64_t> seed;
  /// Random repetitions per grid cell (ICL histories, rollouts, fit trajectories).
  std::size_t trials = 10;
  /// Leading result prompts used from the corpus; 0 means all of them.
  std::size_t prompt_count = 0;
  std::string result_prompts;
  std::string instruct_prompts;
  bool instruct = false;
  std::optional<ProviderConfig> provider;
  BetaParams prior;
  FitOptions fit;
  std::string attention_csv;
  std::string output_dir;
  std::size_t threads = 4;
};

/// Strict parse: unknown keys and wrong types raise ConfigError. Accepts a run
/// record's config.json as well, reading its "config" object.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::filesystem::path& path);
/// Throws ConfigError on empty grids, missing seed, missing files and the like.
void validate(const ExperimentConfig& config);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& out) const;
};

struct TrialError {
  std::string trial;
  std::string kind;
  std::string message;
};

struct RunRecord {
  ExperimentConfig config;
  /// Tidy long format, one metric per row.
  CsvTable results;
  CsvTable summary;
  /// Additional plot-ready files, by file name.
  std::vector<std::pair<std::string, std::string>> extra_files;
  std::vector<std::string> warnings;
  std::vector<TrialError> errors;
  nlohmann::json metadata = nlohmann::json::object();
  std::string started_at;
  double wall_seconds = 0.0;

  int exit_code() const noexcept { return errors.empty() ? 0 : 1; }
};

RunRecord run_bias_sweep(const ExperimentConfig& config);
RunRecord run_icl_sweep(const ExperimentConfig& config);
RunRecord run_changepoint(const ExperimentConfig& config);
RunRecord run_gamma_fit(const ExperimentConfig& config);
RunRecord run_attention_corr(const ExperimentConfig& config);
RunRecord run_experiment(const ExperimentConfig& config);

/// config.json (config snapshot plus run metadata), results.csv, summary.csv,
/// warnings.log and any extra files.
void write_run(const RunRecord& record, const std::filesystem::path& directory);

/// Runs fn(0) ... fn(count - 1) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// Attention CSV with attention and point estimates drawn independently of
/// each other; trial ids are 0 .. n-1, K cycles through `switchovers`.
void write_synthetic_attention_csv(std::ostream& out, std::size_t n,
                                   const std::vector<std::size_t>& switchovers,
                                   std::uint64_t seed);

}  // namespace coinbayes
