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

#include "coinbayes/harness.hpp"

#include <algorithm>
#include <charconv>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "coinbayes/error.hpp"
#include "coinbayes/metrics.hpp"
#include "coinbayes/predictors.hpp"
#include "coinbayes/provider.hpp"
#include "coinbayes/rng.hpp"

namespace coinbayes {
namespace {

using nlohmann::json;

constexpr std::size_t kFinalWindow = 10;

std::string num(double v) { return fmt::format("{}", v); }
std::string num(std::size_t v) { return fmt::format("{}", v); }
std::string num(std::uint64_t v, int) { return fmt::format("{}", v); }

// ---------------------------------------------------------------------------
// config parsing

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known,
                         std::string_view where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

// ---------------------------------------------------------------------------
// predictors

struct PredictorSet {
  std::vector<std::shared_ptr<const Predictor>> predictors;
  std::vector<std::shared_ptr<const RemotePredictor>> remotes;
  std::shared_ptr<ProviderClient> client;
};

PromptCorpus load_corpus(const ExperimentConfig& config) {
  try {
    return PromptCorpus::load(config.result_prompts, config.instruct_prompts);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

PredictorSet build_predictors(const ExperimentConfig& config, const OutcomeSpace& space) {
  PredictorSet set;
  for (const auto& text : config.predictors) {
    const auto spec = PredictorSpec::parse(text);
    if (spec.kind == "remote") {
      if (!config.provider) throw ConfigError("remote predictor needs a provider section");
      if (!set.client) {
        const auto& p = *config.provider;
        std::shared_ptr<LogProbTransport> transport;
        if (!p.replay_only) transport = std::make_shared<HttpTransport>(p.endpoint);
        auto cache = std::make_shared<ReplayCache>(p.cache);
        set.client = std::make_shared<ProviderClient>(
            std::move(transport), std::move(cache), ProviderOptions{p.max_in_flight, p.replay_only});
      }
      auto remote = std::make_shared<RemotePredictor>(set.client, load_corpus(config),
                                                      config.provider->continuations, text);
      set.remotes.push_back(remote);
      set.predictors.push_back(std::move(remote));
    } else {
      try {
        set.predictors.push_back(make_reference_predictor(spec, space));
      } catch (const InvalidArgument& e) {
        throw ConfigError(fmt::format("predictor '{}': {}", text, e.what()));
      }
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// trial bookkeeping

struct TrialOutput {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<std::string>> extra_rows;
  std::optional<TrialError> error;
};

TrialError describe_error(const std::string& trial, const std::exception& e) {
  if (const auto* p = dynamic_cast<const ProviderError*>(&e)) return {trial, p->kind(), e.what()};
  if (dynamic_cast<const ZeroSupportError*>(&e)) return {trial, "zero_support", e.what()};
  if (dynamic_cast<const ConvergenceError*>(&e)) return {trial, "convergence", e.what()};
  return {trial, "error", e.what()};
}

template <typename Fn>
std::vector<TrialOutput> run_trials(std::size_t count, std::size_t threads, Fn&& fn) {
  std::vector<TrialOutput> outputs(count);
  parallel_for(count, threads, [&](std::size_t i) {
    try {
      fn(i, outputs[i]);
    } catch (const std::exception& e) {
      outputs[i].rows.clear();
      outputs[i].extra_rows.clear();
      outputs[i].error = describe_error(fmt::format("trial {}", i), e);
    }
  });
  return outputs;
}

void collect(RunRecord& record, std::vector<TrialOutput>& outputs, CsvTable* extra = nullptr) {
  for (auto& out : outputs) {
    if (out.error) {
      record.errors.push_back(*out.error);
      continue;
    }
    for (auto& row : out.rows) record.results.rows.push_back(std::move(row));
    if (extra) {
      for (auto& row : out.extra_rows) extra->rows.push_back(std::move(row));
    }
  }
}

std::string table_to_string(const CsvTable& table) {
  std::ostringstream out;
  table.write(out);
  return out.str();
}

PredictorContext base_context(const ExperimentConfig& config, const OutcomeSpace& space,
                              std::size_t prompt, std::size_t instruct_count) {
  PredictorContext ctx;
  ctx.space = space;
  ctx.template_id = prompt;
  ctx.instruct = config.instruct;
  ctx.instruct_template_id = instruct_count == 0 ? 0 : prompt % instruct_count;
  ctx.bias_outcome = config.bias_outcome;
  return ctx;
}

std::size_t prompt_total(const ExperimentConfig& config, const PromptCorpus& corpus) {
  return config.prompt_count == 0 ? corpus.result_prompts.size() : config.prompt_count;
}

RunRecord start_record(const ExperimentConfig& config) {
  validate(config);
  RunRecord record;
  record.config = config;
  record.started_at = utc_now();
  record.metadata = {{"library_version", kLibraryVersion},
                     {"rng_algorithm", kRngAlgorithm},
                     {"prompt_rendering_version", kPromptRenderingVersion},
                     {"std_convention", "population"},
                     {"prediction_timing", "predict-then-observe"}};
  return record;
}

void finish_record(RunRecord& record, const PredictorSet& predictors,
                   std::chrono::steady_clock::time_point start) {
  for (const auto& remote : predictors.remotes) {
    const auto diag = remote->diagnostics();
    if (diag.clamped_entries > 0) {
      record.warnings.push_back(fmt::format("{}: {} outcome probabilities clamped to 1e-300",
                                            remote->id(), diag.clamped_entries));
    }
    if (diag.tokenization_mismatches > 0) {
      record.warnings.push_back(
          fmt::format("{}: {} continuations whose tokens do not spell the requested text",
                      remote->id(), diag.tokenization_mismatches));
    }
  }
  if (predictors.client) {
    record.metadata["provider"] = {{"cache_hits", predictors.client->cache_hits()},
                                   {"network_requests", predictors.client->network_requests()}};
  }
  for (const auto& e : record.errors) {
    record.warnings.push_back(fmt::format("{} [{}]: {}", e.trial, e.kind, e.message));
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct IndexBox {
  std::vector<std::size_t> dims;

  std::size_t size() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
  std::vector<std::size_t> unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t i = dims.size(); i-- > 0;) {
      idx[i] = flat % dims[i];
      flat /= dims[i];
    }
    return idx;
  }
};

std::vector<std::size_t> switchovers_for(const ExperimentConfig& config) {
  if (config.switchover_sweep.empty()) return {config.trajectory.switchover()};
  return config.switchover_sweep;
}

ChangepointSpec spec_for_switchover(const ExperimentConfig& config, std::size_t k) {
  if (config.switchover_sweep.empty()) return config.trajectory;
  const auto& segs = config.trajectory.segments();
  return ChangepointSpec::two_segment(config.trajectory.total_length(), k, segs[0].theta[0],
                                      segs[1].theta[0]);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kBiasSweep: return "bias-sweep";
    case ExperimentKind::kIclSweep: return "icl-sweep";
    case ExperimentKind::kChangepoint: return "changepoint";
    case ExperimentKind::kGammaFit: return "gamma-fit";
    case ExperimentKind::kAttentionCorr: return "attention-corr";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto kind : {ExperimentKind::kBiasSweep, ExperimentKind::kIclSweep,
                    ExperimentKind::kChangepoint, ExperimentKind::kGammaFit,
                    ExperimentKind::kAttentionCorr}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

ExperimentConfig config_from_json(const json& input) {
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  if (input.contains("config") && input.at("config").is_object()) {
    return config_from_json(input.at("config"));
  }
  reject_unknown_keys(input,
                      {"experiment", "predictors", "outcome_space", "bias_grid", "bias_outcome",
                       "icl_counts", "icl_bias_statement", "trajectory", "switchover_sweep",
                       "discount_gammas", "seed", "trials", "prompt_count", "result_prompts",
                       "instruct_prompts", "instruct", "provider", "prior", "fit",
                       "attention_csv", "output_dir", "threads"},
                      "config");
  ExperimentConfig c;
  if (input.contains("experiment")) {
    c.kind = parse_experiment_kind(get_as<std::string>(input, "experiment"));
  }
  if (input.contains("predictors")) c.predictors = get_as<std::vector<std::string>>(input, "predictors");
  if (input.contains("outcome_space")) {
    c.outcome_space = get_as<std::vector<std::string>>(input, "outcome_space");
  }
  if (input.contains("bias_grid")) c.bias_grid = get_as<std::vector<double>>(input, "bias_grid");
  if (input.contains("bias_outcome")) c.bias_outcome = get_as<std::size_t>(input, "bias_outcome");
  if (input.contains("icl_counts")) c.icl_counts = get_as<std::vector<std::size_t>>(input, "icl_counts");
  if (input.contains("icl_bias_statement")) {
    c.icl_bias_statement = get_as<bool>(input, "icl_bias_statement");
  }
  if (input.contains("trajectory")) {
    try {
      c.trajectory = changepoint_from_json(input.at("trajectory"));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config key 'trajectory': ") + e.what());
    }
  }
  if (input.contains("switchover_sweep")) {
    c.switchover_sweep = get_as<std::vector<std::size_t>>(input, "switchover_sweep");
  }
  if (input.contains("discount_gammas")) {
    c.discount_gammas = get_as<std::vector<double>>(input, "discount_gammas");
  }
  if (input.contains("seed") && !input.at("seed").is_null()) {
    c.seed = get_as<std::uint64_t>(input, "seed");
  }
  if (input.contains("trials")) c.trials = get_as<std::size_t>(input, "trials");
  if (input.contains("prompt_count")) c.prompt_count = get_as<std::size_t>(input, "prompt_count");
  if (input.contains("result_prompts")) c.result_prompts = get_as<std::string>(input, "result_prompts");
  if (input.contains("instruct_prompts")) {
    c.instruct_prompts = get_as<std::string>(input, "instruct_prompts");
  }
  if (input.contains("instruct")) c.instruct = get_as<bool>(input, "instruct");
  if (input.contains("provider") && !input.at("provider").is_null()) {
    const auto& p = input.at("provider");
    if (!p.is_object()) throw ConfigError("config key 'provider' must be an object");
    reject_unknown_keys(p, {"endpoint", "cache", "replay_only", "max_in_flight", "continuations"},
                        "provider");
    ProviderConfig pc;
    if (p.contains("endpoint")) pc.endpoint = get_as<std::string>(p, "endpoint");
    if (p.contains("cache")) pc.cache = get_as<std::string>(p, "cache");
    if (p.contains("replay_only")) pc.replay_only = get_as<bool>(p, "replay_only");
    if (p.contains("max_in_flight")) pc.max_in_flight = get_as<std::size_t>(p, "max_in_flight");
    if (p.contains("continuations")) {
      pc.continuations = get_as<std::vector<std::string>>(p, "continuations");
    }
    c.provider = std::move(pc);
  }
  if (input.contains("prior")) {
    const auto& p = input.at("prior");
    reject_unknown_keys(p, {"alpha", "beta"}, "prior");
    try {
      c.prior = BetaParams(get_as<double>(p, "alpha"), get_as<double>(p, "beta"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config key 'prior': ") + e.what());
    }
  }
  if (input.contains("fit")) {
    const auto& f = input.at("fit");
    reject_unknown_keys(f, {"lower", "upper", "tol", "grid_points", "flat_threshold"}, "fit");
    if (f.contains("lower")) c.fit.lower = get_as<double>(f, "lower");
    if (f.contains("upper")) c.fit.upper = get_as<double>(f, "upper");
    if (f.contains("tol")) c.fit.tol = get_as<double>(f, "tol");
    if (f.contains("grid_points")) c.fit.grid_points = get_as<std::size_t>(f, "grid_points");
    if (f.contains("flat_threshold")) c.fit.flat_threshold = get_as<double>(f, "flat_threshold");
  }
  if (input.contains("attention_csv")) c.attention_csv = get_as<std::string>(input, "attention_csv");
  if (input.contains("output_dir")) c.output_dir = get_as<std::string>(input, "output_dir");
  if (input.contains("threads")) c.threads = get_as<std::size_t>(input, "threads");

  const auto dir = default_prompt_dir();
  if (c.result_prompts.empty()) c.result_prompts = (dir / "coin_result_prompts.txt").string();
  if (c.instruct_prompts.empty()) c.instruct_prompts = (dir / "coin_instruct_prompts.txt").string();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j{{"experiment", to_string(c.kind)},
         {"predictors", c.predictors},
         {"outcome_space", c.outcome_space},
         {"bias_grid", c.bias_grid},
         {"bias_outcome", c.bias_outcome},
         {"icl_counts", c.icl_counts},
         {"icl_bias_statement", c.icl_bias_statement},
         {"trajectory", changepoint_to_json(c.trajectory)},
         {"switchover_sweep", c.switchover_sweep},
         {"discount_gammas", c.discount_gammas},
         {"seed", c.seed ? json(*c.seed) : json(nullptr)},
         {"trials", c.trials},
         {"prompt_count", c.prompt_count},
         {"result_prompts", c.result_prompts},
         {"instruct_prompts", c.instruct_prompts},
         {"instruct", c.instruct},
         {"prior", {{"alpha", c.prior.alpha()}, {"beta", c.prior.beta()}}},
         {"fit",
          {{"lower", c.fit.lower},
           {"upper", c.fit.upper},
           {"tol", c.fit.tol},
           {"grid_points", c.fit.grid_points},
           {"flat_threshold", c.fit.flat_threshold}}},
         {"attention_csv", c.attention_csv},
         {"output_dir", c.output_dir},
         {"threads", c.threads}};
  if (c.provider) {
    j["provider"] = {{"endpoint", c.provider->endpoint},
                     {"cache", c.provider->cache},
                     {"replay_only", c.provider->replay_only},
                     {"max_in_flight", c.provider->max_in_flight},
                     {"continuations", c.provider->continuations}};
  } else {
    j["provider"] = nullptr;
  }
  return j;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
  if (!c.seed) throw ConfigError("a seed is required");
  if (c.trials == 0) throw ConfigError("trials must be at least 1");
  if (c.threads == 0) throw ConfigError("threads must be at least 1");
  std::optional<OutcomeSpace> space;
  try {
    space.emplace(c.outcome_space);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("outcome_space: ") + e.what());
  }
  if (c.bias_outcome >= space->size()) throw ConfigError("bias_outcome outside the outcome space");

  if (c.kind != ExperimentKind::kAttentionCorr) {
    if (c.predictors.empty()) throw ConfigError("at least one predictor is required");
    for (const auto& p : c.predictors) {
      try {
        const auto spec = PredictorSpec::parse(p);
        if (spec.kind == "remote") {
          if (!c.provider) throw ConfigError("remote predictor needs a provider section");
          if (!c.provider->replay_only && c.provider->endpoint.empty()) {
            throw ConfigError("provider endpoint is required unless replay_only is set");
          }
          if (c.provider->replay_only && c.provider->cache.empty()) {
            throw ConfigError("replay_only needs a cache file");
          }
          if (!c.provider->continuations.empty() &&
              c.provider->continuations.size() != space->size()) {
            throw ConfigError("provider continuations must list one string per outcome");
          }
        } else {
          make_reference_predictor(spec, *space);
        }
      } catch (const InvalidArgument& e) {
        throw ConfigError(fmt::format("predictor '{}': {}", p, e.what()));
      }
    }
  }

  for (const auto& path : {c.result_prompts, c.instruct_prompts}) {
    if (!std::filesystem::exists(path)) throw ConfigError("prompt corpus not found: " + path);
  }
  const auto corpus = load_corpus(c);
  if (c.prompt_count > corpus.result_prompts.size()) {
    throw ConfigError(fmt::format("prompt_count {} exceeds the {} prompts in the corpus",
                                  c.prompt_count, corpus.result_prompts.size()));
  }
  if (c.instruct && corpus.instruct_prompts.empty()) {
    throw ConfigError("instruct mode needs instruct prompts");
  }

  switch (c.kind) {
    case ExperimentKind::kBiasSweep:
    case ExperimentKind::kIclSweep:
      if (c.bias_grid.empty()) throw ConfigError("bias_grid must not be empty");
      for (double b : c.bias_grid) {
        if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("bias_grid values must lie in [0, 1]");
        if (std::abs(100.0 * b - std::round(100.0 * b)) > 1e-9) {
          throw ConfigError(fmt::format("bias {} is not a whole percentage", b));
        }
      }
      if (c.kind == ExperimentKind::kIclSweep && c.icl_counts.empty()) {
        throw ConfigError("icl_counts must not be empty");
      }
      break;
    case ExperimentKind::kChangepoint:
    case ExperimentKind::kGammaFit:
    case ExperimentKind::kAttentionCorr: {
      if (c.trajectory.outcome_count() != space->size()) {
        throw ConfigError("trajectory and outcome space differ in size");
      }
      const bool needs_coin = c.kind != ExperimentKind::kChangepoint || !c.switchover_sweep.empty();
      if (needs_coin && space->size() != 2) throw ConfigError("this experiment needs a coin");
      const bool needs_two =
          !c.switchover_sweep.empty() || c.kind == ExperimentKind::kAttentionCorr;
      if (needs_two && c.trajectory.segments().size() != 2) {
        throw ConfigError("switchover experiments need a two-segment trajectory");
      }
      for (auto k : c.switchover_sweep) {
        if (k == 0 || k >= c.trajectory.total_length()) {
          throw ConfigError(fmt::format("switchover {} outside [1, N-1]", k));
        }
      }
      for (double g : c.discount_gammas) {
        if (!(g > 0.0 && g <= 1.0)) throw ConfigError("discount_gammas must lie in (0, 1]");
      }
      if (c.kind == ExperimentKind::kGammaFit) {
        try {
          gamma_grid(c.fit);
        } catch (const InvalidArgument& e) {
          throw ConfigError(std::string("fit: ") + e.what());
        }
        if (!(c.fit.tol > 0.0)) throw ConfigError("fit.tol must be positive");
      }
      if (c.kind == ExperimentKind::kAttentionCorr) {
        if (c.attention_csv.empty()) throw ConfigError("attention_csv is required");
        if (!std::filesystem::exists(c.attention_csv)) {
          throw ConfigError("attention CSV not found: " + c.attention_csv);
        }
      }
      break;
    }
  }
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      const auto& f = fields[i];
      if (f.find_first_of(",\"\n") != std::string::npos) {
        out << '"';
        for (char ch : f) out << (ch == '"' ? std::string("\"\"") : std::string(1, ch));
        out << '"';
      } else {
        out << f;
      }
    }
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

// ---------------------------------------------------------------------------
// experiments

RunRecord run_bias_sweep(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record = start_record(config);
  const OutcomeSpace space(config.outcome_space);
  const auto corpus = load_corpus(config);
  const auto predictors = build_predictors(config, space);
  const std::size_t prompts = prompt_total(config, corpus);

  const IndexBox box{{predictors.predictors.size(), config.bias_grid.size(), prompts}};
  record.results.header = {"predictor", "bias", "prompt", "metric", "value"};
  std::vector<double> tvds(box.size(), -1.0);

  auto outputs = run_trials(box.size(), config.threads, [&](std::size_t i, TrialOutput& out) {
    const auto idx = box.unflatten(i);
    const auto& predictor = *predictors.predictors[idx[0]];
    const double bias = config.bias_grid[idx[1]];
    auto ctx = base_context(config, space, idx[2], corpus.instruct_prompts.size());
    ctx.bias = bias;
    const auto target = DiscreteDistribution::biased(space.size(), config.bias_outcome, bias);
    const auto predicted = predictor.predict(ctx);
    const double d = tvd(target, predicted);
    tvds[i] = d;
    const std::vector<std::string> key{predictor.id(), num(bias), num(idx[2])};
    auto row = [&](const char* metric, double v) {
      auto r = key;
      r.push_back(metric);
      r.push_back(num(v));
      out.rows.push_back(std::move(r));
    };
    row("tvd", d);
    row("p_bias_outcome", predicted[config.bias_outcome]);
  });
  collect(record, outputs);

  std::vector<TvdRecord> tvd_records;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (outputs[i].error) continue;
    const auto idx = box.unflatten(i);
    tvd_records.push_back(
        {{predictors.predictors[idx[0]]->id(), config.bias_grid[idx[1]], 0, idx[2]}, tvds[i]});
  }
  record.summary.header = {"predictor", "bias", "mean_tvd", "std_tvd", "count"};
  for (const auto& s : aggregate_tvd(tvd_records)) {
    record.summary.rows.push_back(
        {s.key.predictor, num(s.key.bias), num(s.mean), num(s.std), num(s.count)});
  }
  finish_record(record, predictors, start);
  return record;
}

RunRecord run_icl_sweep(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record = start_record(config);
  const OutcomeSpace space(config.outcome_space);
  const auto corpus = load_corpus(config);
  const auto predictors = build_predictors(config, space);
  const std::size_t prompts = prompt_total(config, corpus);

  // Histories are shared across predictors so comparisons are paired.
  const IndexBox history_box{
      {config.bias_grid.size(), config.icl_counts.size(), prompts, config.trials}};
  const IndexBox box{{predictors.predictors.size(), history_box.size()}};
  record.results.header = {"predictor", "bias", "icl_count", "prompt", "trial",
                           "seed",      "metric", "value"};
  std::vector<double> tvds(box.size(), -1.0);

  auto outputs = run_trials(box.size(), config.threads, [&](std::size_t i, TrialOutput& out) {
    const auto outer = box.unflatten(i);
    const auto& predictor = *predictors.predictors[outer[0]];
    const std::size_t history_index = outer[1];
    const auto idx = history_box.unflatten(history_index);
    const double bias = config.bias_grid[idx[0]];
    const std::size_t n = config.icl_counts[idx[1]];
    const std::uint64_t seed = derive_seed(*config.seed, history_index);
    const auto target = DiscreteDistribution::biased(space.size(), config.bias_outcome, bias);

    auto ctx = base_context(config, space, idx[2], corpus.instruct_prompts.size());
    if (config.icl_bias_statement) ctx.bias = bias;
    if (n > 0) {
      ctx.history =
          sample_trajectory(ChangepointSpec({SegmentSpec(n, target)}), space, seed).outcomes;
    }
    const auto predicted = predictor.predict(ctx);
    const double d = tvd(target, predicted);
    tvds[i] = d;
    const std::vector<std::string> key{predictor.id(), num(bias),       num(n),
                                       num(idx[2]),    num(idx[3]),     num(seed, 0)};
    for (const auto& [metric, v] :
         {std::pair{"tvd", d}, std::pair{"p_bias_outcome", predicted[config.bias_outcome]}}) {
      auto r = key;
      r.push_back(metric);
      r.push_back(num(v));
      out.rows.push_back(std::move(r));
    }
  });
  collect(record, outputs);

  std::vector<TvdRecord> tvd_records;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (outputs[i].error) continue;
    const auto outer = box.unflatten(i);
    const auto idx = history_box.unflatten(outer[1]);
    tvd_records.push_back({{predictors.predictors[outer[0]]->id(), config.bias_grid[idx[0]],
                            config.icl_counts[idx[1]], idx[2]},
                           tvds[i]});
  }
  record.summary.header = {"predictor", "bias", "icl_count", "mean_tvd", "std_tvd", "count"};
  for (const auto& s : aggregate_tvd(tvd_records)) {
    record.summary.rows.push_back({s.key.predictor, num(s.key.bias), num(s.key.icl_count),
                                   num(s.mean), num(s.std), num(s.count)});
  }
  finish_record(record, predictors, start);
  return record;
}

RunRecord run_changepoint(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record = start_record(config);
  const OutcomeSpace space(config.outcome_space);
  const auto corpus = load_corpus(config);
  const auto predictors = build_predictors(config, space);
  const std::size_t prompts = prompt_total(config, corpus);
  const auto switchovers = switchovers_for(config);

  const IndexBox rollout_box{{switchovers.size(), config.trials}};
  const IndexBox box{{predictors.predictors.size(), rollout_box.size()}};

  CsvTable rollout;
  rollout.header = {"predictor", "K", "trial", "seed", "step", "outcome", "p_first",
                    "classical_mean"};
  std::vector<std::string> discount_names;
  for (double g : config.discount_gammas) {
    discount_names.push_back("discounted_mean:gamma=" + num(g));
    rollout.header.push_back(discount_names.back());
  }
  rollout.header.push_back("segment_theta");
  record.results.header = {"predictor", "K", "trial", "seed", "step", "metric", "value"};

  struct Final {
    double predictor_mean = 0.0;
    double last_theta = 0.0;
    double mean_tvd = 0.0;
  };
  std::vector<Final> finals(box.size());

  auto outputs = run_trials(box.size(), config.threads, [&](std::size_t i, TrialOutput& out) {
    const auto outer = box.unflatten(i);
    const auto& predictor = *predictors.predictors[outer[0]];
    const auto idx = rollout_box.unflatten(outer[1]);
    const std::size_t k = switchovers[idx[0]];
    const std::uint64_t seed = derive_seed(*config.seed, outer[1]);
    const auto spec = spec_for_switchover(config, k);
    const auto trajectory = sample_trajectory(spec, space, seed);
    const std::size_t n = trajectory.outcomes.size();

    auto ctx = base_context(config, space, idx[1] % prompts, corpus.instruct_prompts.size());
    BetaFilterState classical{config.prior, 1.0};
    std::vector<BetaFilterState> discounted;
    for (double g : config.discount_gammas) discounted.push_back({config.prior, g});
    const bool coin = space.size() == 2;

    double window_sum = 0.0;
    double tvd_sum = 0.0;
    const std::size_t window = std::min(kFinalWindow, n);
    for (std::size_t step = 0; step <= n; ++step) {
      const auto predicted = predictor.predict(ctx);
      const auto& theta = spec.segment_at(std::min(step, n - 1)).theta;
      if (step < n) tvd_sum += tvd(theta, predicted);
      if (step >= n - window && step < n) window_sum += predicted[0];

      std::vector<std::string> wide{predictor.id(), num(k), num(idx[1]), num(seed, 0),
                                    num(step + 1),
                                    step < n ? space.label(trajectory.outcomes[step]) : "",
                                    num(predicted[0])};
      std::vector<std::pair<std::string, double>> metrics{{"p_first", predicted[0]}};
      if (coin) {
        wide.push_back(num(posterior_mean(classical.params)));
        metrics.emplace_back("classical_mean", posterior_mean(classical.params));
        for (std::size_t g = 0; g < discounted.size(); ++g) {
          const double m = posterior_mean(discounted[g].params);
          wide.push_back(num(m));
          metrics.emplace_back(discount_names[g], m);
        }
      } else {
        wide.insert(wide.end(), 1 + discounted.size(), "");
      }
      wide.push_back(num(theta[0]));
      out.extra_rows.push_back(std::move(wide));
      for (const auto& [metric, v] : metrics) {
        out.rows.push_back({predictor.id(), num(k), num(idx[1]), num(seed, 0), num(step + 1),
                            metric, num(v)});
      }

      if (step < n) {
        const std::size_t obs = trajectory.outcomes[step];
        ctx.history.push_back(obs);
        if (coin) {
          classical = filter_step(classical, obs);
          for (auto& d : discounted) d = filter_step(d, obs);
        }
      }
    }
    finals[i] = {window_sum / static_cast<double>(window), spec.segments().back().theta[0],
                 tvd_sum / static_cast<double>(n)};
  });
  collect(record, outputs, &rollout);

  std::map<std::pair<std::string, std::size_t>, std::vector<const Final*>> groups;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (outputs[i].error) continue;
    const auto outer = box.unflatten(i);
    const auto idx = rollout_box.unflatten(outer[1]);
    groups[{predictors.predictors[outer[0]]->id(), switchovers[idx[0]]}].push_back(&finals[i]);
  }
  record.summary.header = {"predictor", "K", "trials", "final_window_mean", "final_theta",
                           "final_window_abs_dev", "mean_tvd_vs_theta"};
  for (const auto& [key, items] : groups) {
    double mean = 0.0, dev = 0.0, tv = 0.0;
    for (const auto* f : items) {
      mean += f->predictor_mean;
      dev += std::abs(f->predictor_mean - f->last_theta);
      tv += f->mean_tvd;
    }
    const double cnt = static_cast<double>(items.size());
    record.summary.rows.push_back({key.first, num(key.second), num(items.size()),
                                   num(mean / cnt), num(items.front()->last_theta),
                                   num(dev / cnt), num(tv / cnt)});
  }
  record.extra_files.emplace_back("rollout.csv", table_to_string(rollout));
  finish_record(record, predictors, start);
  return record;
}

RunRecord run_gamma_fit(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record = start_record(config);
  const OutcomeSpace space(config.outcome_space);
  const auto corpus = load_corpus(config);
  const auto predictors = build_predictors(config, space);
  const std::size_t prompts = prompt_total(config, corpus);

  const IndexBox box{{predictors.predictors.size(), config.trials}};
  std::vector<std::optional<TracedTrajectory>> traced(box.size());
  auto outputs = run_trials(box.size(), config.threads, [&](std::size_t i, TrialOutput&) {
    const auto idx = box.unflatten(i);
    const auto& predictor = *predictors.predictors[idx[0]];
    const std::uint64_t seed = derive_seed(*config.seed, idx[1]);
    auto trajectory = sample_trajectory(config.trajectory, space, seed);
    const auto ctx = base_context(config, space, idx[1] % prompts, corpus.instruct_prompts.size());
    auto trace = make_trace(predictor, trajectory, ctx);
    traced[i] = TracedTrajectory{std::move(trace), std::move(trajectory)};
  });
  for (auto& out : outputs) {
    if (out.error) record.errors.push_back(*out.error);
  }

  record.results.header = {"predictor", "metric", "value"};
  std::vector<GammaTableRow> table;
  for (std::size_t p = 0; p < predictors.predictors.size(); ++p) {
    const auto id = predictors.predictors[p]->id();
    std::vector<TracedTrajectory> data;
    for (std::size_t t = 0; t < config.trials; ++t) {
      if (auto& d = traced[p * config.trials + t]) data.push_back(*d);
    }
    if (data.empty()) {
      record.warnings.push_back(id + ": no usable traces, fit skipped");
      continue;
    }
    const auto fit = fit_gamma(data, config.prior, config.fit);
    if (!fit.identifiable()) record.warnings.push_back(id + ": " + fit.note);
    if (fit.gamma_star) record.results.rows.push_back({id, "gamma_star", num(*fit.gamma_star)});
    record.results.rows.push_back({id, "objective", num(fit.objective_value)});
    record.results.rows.push_back({id, "evaluations", num(fit.evaluations)});
    record.results.rows.push_back({id, "converged", fit.converged ? "1" : "0"});
    record.results.rows.push_back({id, "identifiable", fit.identifiable() ? "1" : "0"});
    record.results.rows.push_back({id, "trajectories", num(data.size())});
    table.push_back({id, fit});
  }
  std::ostringstream text;
  write_gamma_table_text(text, table);
  record.summary.header = {"predictor", "gamma_star", "objective", "evaluations", "converged",
                           "identifiable"};
  for (const auto& row : table) {
    const auto& fit = row.fit;
    record.summary.rows.push_back(
        {row.predictor_id, fit.gamma_star ? fmt::format("{:.4f}", *fit.gamma_star) : "",
         fmt::format("{:.6g}", fit.objective_value), num(fit.evaluations),
         fit.converged ? "true" : "false", fit.identifiable() ? "true" : "false"});
  }
  record.extra_files.emplace_back("gamma_table.txt", text.str());
  finish_record(record, predictors, start);
  return record;
}

RunRecord run_attention_corr(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record = start_record(config);
  const OutcomeSpace space(config.outcome_space);
  const std::size_t total = config.trajectory.total_length();
  const double theta1 = config.trajectory.segments()[0].theta[0];
  const double theta2 = config.trajectory.segments()[1].theta[0];

  std::ifstream in(config.attention_csv);
  const auto csv = read_attention_csv(in);
  for (const auto& e : csv.errors) record.errors.push_back({config.attention_csv, "csv", e});

  std::vector<AttentionObservation> observations;
  for (const auto& rec : csv.records) {
    std::uint64_t trial = 0;
    const auto [ptr, ec] = std::from_chars(rec.trial_id.data(),
                                           rec.trial_id.data() + rec.trial_id.size(), trial);
    if (ec != std::errc() || ptr != rec.trial_id.data() + rec.trial_id.size()) {
      record.errors.push_back({rec.trial_id, "csv", "trial_id must be a non-negative integer"});
      continue;
    }
    if (rec.switchover > total) {
      record.errors.push_back(
          {rec.trial_id, "csv", fmt::format("K={} exceeds trajectory length {}", rec.switchover, total)});
      continue;
    }
    std::vector<SegmentSpec> segments;
    if (rec.switchover > 0) segments.push_back(SegmentSpec::coin(rec.switchover, theta1));
    if (rec.switchover < total) segments.push_back(SegmentSpec::coin(total - rec.switchover, theta2));
    const auto trajectory =
        sample_trajectory(ChangepointSpec(std::move(segments)), space, derive_seed(*config.seed, trial));
    const auto counts = empirical_counts(trajectory, 0, total);
    const auto posterior = posterior_update(config.prior, ObservationCounts(counts[0], total));
    observations.push_back({rec, total - rec.switchover, posterior});
  }

  record.results.header = {"trial_id", "K", "metric", "value"};
  record.summary.header = {"segment", "r", "p_value", "n"};
  try {
    const auto analysis = attention_analysis(observations);
    for (const auto& row : analysis.fractions) {
      for (const auto& [metric, v] :
           {std::pair{"extremity", row.extremity}, std::pair{"fraction_seg1", row.fraction_seg1},
            std::pair{"fraction_seg2", row.fraction_seg2},
            std::pair{"posterior_mean", row.posterior_mean}, std::pair{"deviation", row.deviation}}) {
        record.results.rows.push_back({row.trial_id, num(row.switchover), metric, num(v)});
      }
    }
    for (const auto& [name, result] : {std::pair{"seg1", analysis.seg1}, std::pair{"seg2", analysis.seg2}}) {
      if (result) {
        record.summary.rows.push_back({name, num(result->r), num(result->p_value), num(result->n)});
      }
    }
    CsvTable fits;
    fits.header = {"M", "c0", "c1", "c2", "n"};
    for (const auto& f : analysis.fits) {
      fits.rows.push_back({num(f.post_switch), num(f.coefficients[0]), num(f.coefficients[1]),
                           num(f.coefficients[2]), num(f.n)});
    }
    record.extra_files.emplace_back("fits.csv", table_to_string(fits));
    for (const auto& r : analysis.report) record.warnings.push_back(r);
  } catch (const InvalidArgument& e) {
    record.errors.push_back({config.attention_csv, "precondition", e.what()});
  }
  finish_record(record, PredictorSet{}, start);
  return record;
}

RunRecord run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kBiasSweep: return run_bias_sweep(config);
    case ExperimentKind::kIclSweep: return run_icl_sweep(config);
    case ExperimentKind::kChangepoint: return run_changepoint(config);
    case ExperimentKind::kGammaFit: return run_gamma_fit(config);
    case ExperimentKind::kAttentionCorr: return run_attention_corr(config);
  }
  throw ConfigError("unknown experiment kind");
}

void write_run(const RunRecord& record, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  auto open = [&](const char* name) {
    std::ofstream out(directory / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (directory / name).string());
    return out;
  };
  json meta = record.metadata;
  meta["config"] = to_json(record.config);
  meta["started_at"] = record.started_at;
  meta["wall_seconds"] = record.wall_seconds;
  meta["results_rows"] = record.results.rows.size();
  json errors = json::array();
  for (const auto& e : record.errors) {
    errors.push_back({{"trial", e.trial}, {"kind", e.kind}, {"message", e.message}});
  }
  meta["errors"] = std::move(errors);
  {
    auto out = open("config.json");
    out << meta.dump(2) << '\n';
  }
  {
    auto out = open("results.csv");
    record.results.write(out);
  }
  {
    auto out = open("summary.csv");
    record.summary.write(out);
  }
  {
    auto out = open("warnings.log");
    for (const auto& w : record.warnings) out << w << '\n';
  }
  for (const auto& [name, content] : record.extra_files) {
    auto out = open(name.c_str());
    out << content;
  }
}

void write_synthetic_attention_csv(std::ostream& out, std::size_t n,
                                   const std::vector<std::size_t>& switchovers,
                                   std::uint64_t seed) {
  if (switchovers.empty()) throw InvalidArgument("need at least one switchover value");
  out << "trial_id,K,attn_seg1,attn_seg2,point_estimate\n";
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    const double a1 = rng.uniform();
    const double a2 = rng.uniform();
    const double estimate = rng.uniform();
    out << i << ',' << switchovers[i % switchovers.size()] << ',' << num(a1) << ',' << num(a2)
        << ',' << num(estimate) << '\n';
  }
}

}  // namespace coinbayes
