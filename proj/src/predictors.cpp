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

#include "coinbayes/predictors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "coinbayes/error.hpp"

#ifndef COINBAYES_PROMPT_DIR
#define COINBAYES_PROMPT_DIR "data/prompts"
#endif

namespace coinbayes {
namespace {

std::vector<std::string> read_prompt_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open prompt file " + path.string());
  std::vector<std::string> prompts;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (!line.empty()) prompts.push_back(std::move(line));
  }
  return prompts;
}

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::string bias_statement(const PredictorContext& context, const PromptCorpus& corpus) {
  std::string s = replace_all(corpus.bias_template, "{outcome}",
                              context.space.label(context.bias_outcome));
  return replace_all(std::move(s), "{percent}", render_percent(*context.bias));
}

std::string render_completion(const PredictorContext& context, const PromptCorpus& corpus) {
  if (context.template_id >= corpus.result_prompts.size()) {
    throw InvalidArgument(fmt::format("template id {} outside corpus of {} prompts",
                                      context.template_id, corpus.result_prompts.size()));
  }
  std::string text = corpus.result_prompts[context.template_id];
  for (std::size_t i = 0; i < context.history.size(); ++i) {
    text += i == 0 ? " " : ", then on ";
    text += context.space.label(context.history[i]);
  }
  if (!context.history.empty()) text += ", then on";
  return text;
}

std::string format_param(double v) { return fmt::format("{}", v); }

}  // namespace

void validate(const PredictorContext& context) {
  for (std::size_t o : context.history) {
    if (!context.space.contains(o)) {
      throw InvalidArgument(fmt::format("history outcome {} outside space of size {}", o,
                                        context.space.size()));
    }
  }
  if (context.bias) {
    if (!(*context.bias >= 0.0 && *context.bias <= 1.0)) {
      throw InvalidArgument("biasing theta must lie in [0, 1]");
    }
    if (!context.space.contains(context.bias_outcome)) {
      throw InvalidArgument("biased outcome outside the outcome space");
    }
  }
}

PromptCorpus PromptCorpus::load(const std::filesystem::path& result_prompts,
                                const std::filesystem::path& instruct_prompts) {
  PromptCorpus corpus;
  corpus.result_prompts = read_prompt_lines(result_prompts);
  corpus.instruct_prompts = read_prompt_lines(instruct_prompts);
  if (corpus.result_prompts.empty()) throw InvalidArgument("result prompt corpus is empty");
  return corpus;
}

std::filesystem::path default_prompt_dir() {
  if (const char* env = std::getenv("COINBAYES_PROMPT_DIR"); env && *env) return env;
  return COINBAYES_PROMPT_DIR;
}

PromptCorpus load_default_corpus() {
  const auto dir = default_prompt_dir();
  return PromptCorpus::load(dir / "coin_result_prompts.txt", dir / "coin_instruct_prompts.txt");
}

std::string render_percent(double theta) {
  return fmt::format("{}", static_cast<long long>(std::lround(100.0 * theta)));
}

std::string render_prompt(const PredictorContext& context, const PromptCorpus& corpus) {
  validate(context);
  std::string completion = render_completion(context, corpus);
  if (!context.bias) return completion;
  return bias_statement(context, corpus) + " " + completion;
}

std::optional<ChatPrompt> render_chat(const PredictorContext& context,
                                      const PromptCorpus& corpus) {
  if (!context.instruct) return std::nullopt;
  validate(context);
  if (context.instruct_template_id >= corpus.instruct_prompts.size()) {
    throw InvalidArgument(fmt::format("instruct template id {} outside corpus of {} prompts",
                                      context.instruct_template_id,
                                      corpus.instruct_prompts.size()));
  }
  ChatPrompt chat;
  if (context.bias) chat.user = bias_statement(context, corpus) + " ";
  chat.user += corpus.instruct_prompts[context.instruct_template_id];
  chat.assistant_prefix = render_completion(context, corpus);
  return chat;
}

bool ends_mid_sentence(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  const char last = text.back();
  return last != '.' && last != '!' && last != '?';
}

ExactBayesPredictor::ExactBayesPredictor(DirichletParams prior, std::string id)
    : prior_(std::move(prior)), id_(std::move(id)) {}

ExactBayesPredictor::ExactBayesPredictor(const BetaParams& prior, std::string id)
    : ExactBayesPredictor(DirichletParams::from_beta(prior), std::move(id)) {}

DiscreteDistribution ExactBayesPredictor::predict(const PredictorContext& context) const {
  validate(context);
  if (context.space.size() != prior_.size()) {
    throw InvalidArgument("prior dimension does not match the outcome space");
  }
  std::vector<std::uint64_t> counts(prior_.size(), 0);
  for (std::size_t o : context.history) ++counts[o];
  return predictive(dirichlet_update(prior_, counts));
}

DiscountedBayesPredictor::DiscountedBayesPredictor(DirichletParams prior, double gamma,
                                                   std::string id)
    : prior_(std::move(prior)), gamma_(checked_discount(gamma)), id_(std::move(id)) {
  if (id_.empty()) id_ = "discounted_bayes:gamma=" + format_param(gamma_);
}

DiscountedBayesPredictor::DiscountedBayesPredictor(const BetaParams& prior, double gamma,
                                                   std::string id)
    : DiscountedBayesPredictor(DirichletParams::from_beta(prior), gamma, std::move(id)) {}

DiscreteDistribution DiscountedBayesPredictor::predict(const PredictorContext& context) const {
  validate(context);
  if (context.space.size() != prior_.size()) {
    throw InvalidArgument("prior dimension does not match the outcome space");
  }
  if (prior_.size() == 2) {
    // Same arithmetic as the Beta filter so fitted objectives vanish exactly.
    BetaFilterState state{BetaParams(prior_[0], prior_[1]), gamma_};
    state = filter(state, context.history);
    return predictive(state.params);
  }
  DirichletFilterState state{prior_, gamma_};
  for (std::size_t o : context.history) state = filter_step(state, o);
  return predictive(state.params);
}

FixedBiasPredictor::FixedBiasPredictor(DiscreteDistribution distribution, std::string id)
    : distribution_(std::move(distribution)), id_(std::move(id)) {
  if (id_.empty()) id_ = "fixed_bias:p=" + format_param(distribution_[0]);
}

DiscreteDistribution FixedBiasPredictor::predict(const PredictorContext& context) const {
  validate(context);
  if (context.space.size() != distribution_.size()) {
    throw InvalidArgument("fixed distribution does not match the outcome space");
  }
  return distribution_;
}

PredictorSpec PredictorSpec::parse(std::string_view text) {
  PredictorSpec spec;
  const auto colon = text.find(':');
  spec.kind = std::string(text.substr(0, colon));
  if (spec.kind.empty()) throw InvalidArgument("predictor spec has no kind");
  if (colon == std::string_view::npos) return spec;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw InvalidArgument("malformed predictor parameter '" + std::string(item) + "'");
    }
    const std::string value(item.substr(eq + 1));
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
      throw InvalidArgument("predictor parameter '" + std::string(item) + "' is not numeric");
    }
    spec.params[std::string(item.substr(0, eq))] = v;
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return spec;
}

std::string PredictorSpec::to_string() const {
  std::string out = kind;
  char sep = ':';
  for (const auto& [k, v] : params) {
    out += sep;
    out += k + "=" + format_param(v);
    sep = ',';
  }
  return out;
}

std::optional<double> PredictorSpec::get(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::unique_ptr<Predictor> make_reference_predictor(const PredictorSpec& spec,
                                                    const OutcomeSpace& space) {
  auto require = [&](const char* key) {
    auto v = spec.get(key);
    if (!v) throw InvalidArgument(spec.kind + " requires parameter '" + key + "'");
    return *v;
  };
  auto prior = [&](bool required) {
    if (space.size() != 2) {
      if (spec.get("alpha") || spec.get("beta")) {
        throw InvalidArgument("alpha/beta priors only apply to two-outcome spaces");
      }
      return DirichletParams::uniform(space.size());
    }
    if (required) return DirichletParams({require("alpha"), require("beta")});
    return DirichletParams({spec.get("alpha").value_or(1.0), spec.get("beta").value_or(1.0)});
  };
  const std::string id = spec.to_string();

  if (spec.kind == "exact_bayes") {
    return std::make_unique<ExactBayesPredictor>(prior(false), id);
  }
  if (spec.kind == "discounted_bayes") {
    return std::make_unique<DiscountedBayesPredictor>(prior(false), require("gamma"), id);
  }
  if (spec.kind == "fixed_bias") {
    const double p = require("p");
    const auto outcome = static_cast<std::size_t>(spec.get("outcome").value_or(0.0));
    return std::make_unique<FixedBiasPredictor>(
        DiscreteDistribution::biased(space.size(), outcome, p), id);
  }
  if (spec.kind == "miscalibrated_bayes") {
    return std::make_unique<ExactBayesPredictor>(prior(true), id);
  }
  throw InvalidArgument("unknown predictor kind '" + spec.kind + "'");
}

std::vector<double> PredictionTrace::first_outcome_probabilities() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& d : steps) out.push_back(d[0]);
  return out;
}

PredictionTrace make_trace(const Predictor& predictor, const Trajectory& trajectory,
                           const PredictorContext& base) {
  PredictionTrace trace{predictor.id(), {}};
  trace.steps.reserve(trajectory.outcomes.size());
  PredictorContext context = base;
  context.history.clear();
  for (std::size_t t = 0; t < trajectory.outcomes.size(); ++t) {
    trace.steps.push_back(predictor.predict(context));
    context.history.push_back(trajectory.outcomes[t]);
  }
  return trace;
}

}  // namespace coinbayes
