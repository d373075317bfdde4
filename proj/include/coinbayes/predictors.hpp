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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coinbayes/oracle.hpp"
#include "coinbayes/outcome.hpp"
#include "coinbayes/trajectory.hpp"

namespace coinbayes {

/// Everything a predictor may condition on for one prediction.
struct PredictorContext {
  OutcomeSpace space = OutcomeSpace::coin();
  /// Index into the corpus result prompts.
  std::size_t template_id = 0;
  /// Probability of `bias_outcome` stated in an explicit biasing sentence.
  std::optional<double> bias;
  std::size_t bias_outcome = 0;
  /// Observed outcomes shown in context, oldest first.
  std::vector<std::size_t> history;
  bool instruct = false;
  std::size_t instruct_template_id = 0;
};

/// Throws InvalidArgument on out-of-range history entries or bias.
void validate(const PredictorContext& context);

// ---------------------------------------------------------------------------
// Prompt corpus and rendering

/// Recorded in run metadata; bump when the rendered text changes.
inline constexpr std::string_view kPromptRenderingVersion = "then-on-chain/v1";

struct PromptCorpus {
  std::vector<std::string> result_prompts;
  std::vector<std::string> instruct_prompts;
  /// `{outcome}` and `{percent}` are substituted.
  std::string bias_template = "When I flip coins, they land on {outcome} {percent}% of the time.";

  /// One prompt per line; trailing whitespace is dropped, blank lines skipped.
  static PromptCorpus load(const std::filesystem::path& result_prompts,
                           const std::filesystem::path& instruct_prompts);
};

/// Directory holding the shipped coin corpora.
std::filesystem::path default_prompt_dir();
PromptCorpus load_default_corpus();

struct ChatPrompt {
  std::string user;
  std::string assistant_prefix;

  bool operator==(const ChatPrompt&) const = default;
};

/// round(100 * theta) as an integer string.
std::string render_percent(double theta);

/// Biasing statement (if any), the result prompt, and the in-context history
/// as "<stem> heads, then on tails, then on". Ends mid-sentence so the next
/// tokens are the outcome.
std::string render_prompt(const PredictorContext& context, const PromptCorpus& corpus);

/// Instruct-mode chat turns: the user turn carries the biasing statement and
/// instruct prompt, the assistant turn is the partial answer to complete.
/// Empty when the context is not in instruct mode.
std::optional<ChatPrompt> render_chat(const PredictorContext& context,
                                      const PromptCorpus& corpus);

/// False when the text ends with sentence-final punctuation.
bool ends_mid_sentence(std::string_view text);

// ---------------------------------------------------------------------------
// Predictors

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string id() const = 0;
  virtual DiscreteDistribution predict(const PredictorContext& context) const = 0;
};

/// Conjugate posterior predictive over the full history.
class ExactBayesPredictor final : public Predictor {
 public:
  explicit ExactBayesPredictor(DirichletParams prior, std::string id = "exact_bayes");
  explicit ExactBayesPredictor(const BetaParams& prior = {}, std::string id = "exact_bayes");

  std::string id() const override { return id_; }
  DiscreteDistribution predict(const PredictorContext& context) const override;

 private:
  DirichletParams prior_;
  std::string id_;
};

/// Posterior mean of the discounted filter run over the history.
class DiscountedBayesPredictor final : public Predictor {
 public:
  DiscountedBayesPredictor(DirichletParams prior, double gamma, std::string id = {});
  DiscountedBayesPredictor(const BetaParams& prior, double gamma, std::string id = {});

  std::string id() const override { return id_; }
  DiscreteDistribution predict(const PredictorContext& context) const override;

 private:
  DirichletParams prior_;
  double gamma_;
  std::string id_;
};

/// Ignores the context entirely.
class FixedBiasPredictor final : public Predictor {
 public:
  explicit FixedBiasPredictor(DiscreteDistribution distribution, std::string id = {});

  std::string id() const override { return id_; }
  DiscreteDistribution predict(const PredictorContext& context) const override;

 private:
  DiscreteDistribution distribution_;
  std::string id_;
};

/// "kind:key=value,key=value", e.g. "discounted_bayes:gamma=0.5".
struct PredictorSpec {
  std::string kind;
  std::map<std::string, double> params;

  static PredictorSpec parse(std::string_view text);
  std::string to_string() const;
  std::optional<double> get(const std::string& key) const;
};

/**
 * Builds one of the synthetic reference predictors:
 *   exact_bayes          alpha, beta (default 1, 1)
 *   discounted_bayes     gamma (required), alpha, beta
 *   fixed_bias           p (required), outcome (default 0)
 *   miscalibrated_bayes  alpha, beta (required); exact Bayes under that prior
 * For spaces with more than two outcomes the Bayes kinds use Dir(1, ..., 1).
 */
std::unique_ptr<Predictor> make_reference_predictor(const PredictorSpec& spec,
                                                    const OutcomeSpace& space = OutcomeSpace::coin());

/// Per-step predictions; entry t conditions on outcomes [0, t) only.
struct PredictionTrace {
  std::string predictor_id;
  std::vector<DiscreteDistribution> steps;

  /// P(first outcome) at each step.
  std::vector<double> first_outcome_probabilities() const;
};

/// Runs `predictor` over `trajectory` in predict-then-observe order.
/// `base` supplies the template, bias and instruct settings.
PredictionTrace make_trace(const Predictor& predictor, const Trajectory& trajectory,
                           const PredictorContext& base);

}  // namespace coinbayes
