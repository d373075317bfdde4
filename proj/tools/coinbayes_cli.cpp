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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "coinbayes/error.hpp"
#include "coinbayes/harness.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> predictors;
  std::string provider;
  std::string cache;
  bool replay_only = false;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> threads;
  std::string attention_csv;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file (or a previous run's config.json)");
  cmd->add_option("--seed", o.seed, "root seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--predictor", o.predictors,
                  "predictor spec, repeatable (exact_bayes, discounted_bayes:gamma=0.5, "
                  "fixed_bias:p=0.7, miscalibrated_bayes:alpha=7,beta=3, remote)")
      ->delimiter('\0');
  cmd->add_option("--provider", o.provider, "logprob endpoint, http://host:port/path");
  cmd->add_option("--cache", o.cache, "replay cache file (JSON lines)");
  cmd->add_flag("--replay-only", o.replay_only, "serve remote requests from the cache only");
  cmd->add_option("--trials", o.trials, "repetitions per grid cell");
  cmd->add_option("--threads", o.threads, "worker threads");
}

coinbayes::ExperimentConfig resolve(coinbayes::ExperimentKind kind, const Overrides& o) {
  using namespace coinbayes;
  ExperimentConfig config =
      o.config.empty() ? config_from_json(nlohmann::json::object()) : load_config_file(o.config);
  config.kind = kind;
  if (o.seed) config.seed = o.seed;
  if (!o.out.empty()) config.output_dir = o.out;
  if (!o.predictors.empty()) config.predictors = o.predictors;
  if (o.trials) config.trials = *o.trials;
  if (o.threads) config.threads = *o.threads;
  if (!o.attention_csv.empty()) config.attention_csv = o.attention_csv;
  if (!o.provider.empty() || !o.cache.empty() || o.replay_only) {
    if (!config.provider) config.provider.emplace();
    if (!o.provider.empty()) config.provider->endpoint = o.provider;
    if (!o.cache.empty()) config.provider->cache = o.cache;
    if (o.replay_only) config.provider->replay_only = true;
  }
  if (config.output_dir.empty() && config.seed) {
    config.output_dir = fmt::format("runs/{}-{}", to_string(kind), *config.seed);
  }
  validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace coinbayes;
  CLI::App app{"coinbayes: Bayesian reference experiments for coin-flip prediction"};
  app.set_version_flag("--version", std::string(kLibraryVersion));
  app.require_subcommand(1);

  Overrides overrides;
  std::optional<ExperimentKind> chosen;
  const std::pair<ExperimentKind, const char*> kinds[] = {
      {ExperimentKind::kBiasSweep, "TVD of predictors against stated biases"},
      {ExperimentKind::kIclSweep, "TVD as in-context flips accumulate"},
      {ExperimentKind::kChangepoint, "rollouts over a piecewise-stationary coin"},
      {ExperimentKind::kGammaFit, "fit a discount factor to prediction traces"},
      {ExperimentKind::kAttentionCorr, "correlate attention split with posterior extremity"},
  };
  for (const auto& [kind, about] : kinds) {
    auto* cmd = app.add_subcommand(std::string(to_string(kind)), about);
    add_run_flags(cmd, overrides);
    if (kind == ExperimentKind::kAttentionCorr) {
      cmd->add_option("--attention-csv", overrides.attention_csv,
                      "CSV with trial_id,K,attn_seg1,attn_seg2,point_estimate");
    }
    cmd->callback([&chosen, kind] { chosen = kind; });
  }

  std::size_t synth_n = 1000;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  std::vector<std::size_t> synth_k{10, 20, 30, 40, 50, 60, 70, 80, 90};
  auto* synth = app.add_subcommand("synth-attention", "write an attention CSV with independent columns");
  synth->add_option("--n", synth_n, "rows");
  synth->add_option("--seed", synth_seed, "seed")->required();
  synth->add_option("--out", synth_out, "output file")->required();
  synth->add_option("--switchovers", synth_k, "K values to cycle through");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      std::ofstream out(synth_out);
      if (!out) throw ConfigError("cannot write " + synth_out);
      write_synthetic_attention_csv(out, synth_n, synth_k, synth_seed);
      return 0;
    }
    const auto config = resolve(*chosen, overrides);
    const auto record = run_experiment(config);
    write_run(record, config.output_dir);
    for (const auto& w : record.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << fmt::format("{}: {} result rows, {} trial errors, written to {}\n",
                             to_string(config.kind), record.results.rows.size(),
                             record.errors.size(), config.output_dir);
    return record.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
