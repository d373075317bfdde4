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

#include <set>

#include "doctest.h"

#include "coinbayes/error.hpp"
#include "coinbayes/predictors.hpp"
#include "coinbayes/rng.hpp"

using namespace coinbayes;

namespace {

PredictorContext with_history(std::vector<std::size_t> history) {
  PredictorContext ctx;
  ctx.history = std::move(history);
  return ctx;
}

PromptCorpus single_stem_corpus() {
  PromptCorpus corpus;
  corpus.result_prompts = {"I flipped a coin and it landed on"};
  corpus.instruct_prompts = {"Complete the sentence: I flipped a coin and it landed on"};
  return corpus;
}

}  // namespace

TEST_CASE("exact bayes") {
  const ExactBayesPredictor p;
  CHECK(p.predict(with_history({0, 1, 1}))[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.predict(with_history({}))[0] == 0.5);
  CHECK_THROWS_AS(p.predict(with_history({2})), InvalidArgument);
}

TEST_CASE("discounted bayes with gamma 1 equals exact bayes") {
  const ExactBayesPredictor exact;
  const DiscountedBayesPredictor discounted(BetaParams(), 1.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    std::vector<std::size_t> history(rng.next_u64() % 60);
    for (auto& h : history) h = rng.next_u64() % 2;
    CHECK(exact.predict(with_history(history)) == discounted.predict(with_history(history)));
  }
}

TEST_CASE("discounted bayes matches the filter") {
  const DiscountedBayesPredictor p(BetaParams(), 0.5);
  const auto d = p.predict(with_history({0}));
  CHECK(d[0] == doctest::Approx(1.5 / 2.0));
  CHECK(p.id() == "discounted_bayes:gamma=0.5");
  CHECK_THROWS_AS(DiscountedBayesPredictor(BetaParams(), 0.0), InvalidArgument);
}

TEST_CASE("fixed bias ignores history") {
  const FixedBiasPredictor p(DiscreteDistribution::bernoulli(0.7));
  CHECK(p.predict(with_history({1, 1, 1, 1}))[0] == 0.7);
  CHECK(p.predict(with_history({}))[1] == doctest::Approx(0.3));
}

TEST_CASE("die predictors") {
  PredictorContext ctx;
  ctx.space = OutcomeSpace::die();
  ctx.history = {0, 0, 0};
  const auto exact = make_reference_predictor(PredictorSpec::parse("exact_bayes"), ctx.space);
  const auto d = exact->predict(ctx);
  CHECK(d[0] == doctest::Approx(4.0 / 9.0));
  const auto disc =
      make_reference_predictor(PredictorSpec::parse("discounted_bayes:gamma=1"), ctx.space);
  CHECK(disc->predict(ctx)[0] == doctest::Approx(4.0 / 9.0));
  const auto fixed =
      make_reference_predictor(PredictorSpec::parse("fixed_bias:p=0.5,outcome=2"), ctx.space);
  CHECK(fixed->predict(ctx)[2] == 0.5);
  CHECK(fixed->predict(ctx)[0] == doctest::Approx(0.1));
}

TEST_CASE("predictor specs") {
  const auto spec = PredictorSpec::parse("miscalibrated_bayes:alpha=7,beta=3");
  CHECK(spec.kind == "miscalibrated_bayes");
  CHECK(spec.get("alpha") == 7.0);
  CHECK(spec.to_string() == "miscalibrated_bayes:alpha=7,beta=3");
  const auto p = make_reference_predictor(spec);
  CHECK(p->predict(PredictorContext{})[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(make_reference_predictor(PredictorSpec::parse("fixed_bias:p=0.7"))->predict({})[0] == 0.7);
  CHECK_THROWS_AS(make_reference_predictor(PredictorSpec::parse("oracle")), InvalidArgument);
  CHECK_THROWS_AS(make_reference_predictor(PredictorSpec::parse("discounted_bayes")),
                  InvalidArgument);
  CHECK_THROWS_AS(make_reference_predictor(PredictorSpec::parse("miscalibrated_bayes:alpha=2")),
                  InvalidArgument);
  CHECK_THROWS_AS(PredictorSpec::parse("exact_bayes:alpha"), InvalidArgument);
  CHECK_THROWS_AS(PredictorSpec::parse("exact_bayes:alpha=x"), InvalidArgument);
}

TEST_CASE("prompt rendering") {
  const auto corpus = single_stem_corpus();
  PredictorContext ctx;
  ctx.bias = 0.2;
  CHECK(render_prompt(ctx, corpus) ==
        "When I flip coins, they land on heads 20% of the time. I flipped a coin and it landed on");
  ctx.bias.reset();
  ctx.history = {0, 1, 1};
  CHECK(render_prompt(ctx, corpus) ==
        "I flipped a coin and it landed on heads, then on tails, then on tails, then on");
  ctx.template_id = 1;
  CHECK_THROWS_AS(render_prompt(ctx, corpus), InvalidArgument);
  CHECK(render_percent(0.07) == "7");
  CHECK(render_percent(1.0) == "100");
}

TEST_CASE("instruct rendering") {
  const auto corpus = single_stem_corpus();
  PredictorContext ctx;
  ctx.instruct = true;
  ctx.bias = 0.7;
  ctx.history = {1};
  const auto chat = render_chat(ctx, corpus);
  REQUIRE(chat.has_value());
  CHECK(chat->user ==
        "When I flip coins, they land on heads 70% of the time. Complete the sentence: I flipped "
        "a coin and it landed on");
  CHECK(chat->assistant_prefix == "I flipped a coin and it landed on tails, then on");
  CHECK(ends_mid_sentence(chat->assistant_prefix));
  CHECK_FALSE(ends_mid_sentence("It landed on heads."));
  ctx.instruct = false;
  CHECK_FALSE(render_chat(ctx, corpus).has_value());
}

TEST_CASE("shipped corpus") {
  const auto corpus = load_default_corpus();
  CHECK(corpus.result_prompts.size() == 50);
  CHECK(corpus.instruct_prompts.size() == 5);
  std::set<std::string> distinct(corpus.result_prompts.begin(), corpus.result_prompts.end());
  CHECK(distinct.size() == 50);
  for (const auto& p : corpus.result_prompts) CHECK(ends_mid_sentence(p));
}

TEST_CASE("rendering is injective over template, bias and history") {
  const auto corpus = load_default_corpus();
  std::set<std::string> seen;
  std::size_t total = 0;
  const std::vector<std::vector<std::size_t>> histories{{}, {0}, {1}, {0, 1}, {1, 0}, {0, 0, 1}};
  for (std::size_t t = 0; t < corpus.result_prompts.size(); ++t) {
    for (int b = -1; b <= 100; b += 7) {
      for (const auto& h : histories) {
        PredictorContext ctx;
        ctx.template_id = t;
        if (b >= 0) ctx.bias = b / 100.0;
        ctx.history = h;
        seen.insert(render_prompt(ctx, corpus));
        ++total;
      }
    }
  }
  CHECK(seen.size() == total);
}

TEST_CASE("traces follow predict-then-observe") {
  const auto traj = sample_trajectory(default_changepoint(), OutcomeSpace::coin(), 4);
  const ExactBayesPredictor p;
  const auto trace = make_trace(p, traj, PredictorContext{});
  REQUIRE(trace.steps.size() == 100);
  CHECK(trace.steps[0][0] == 0.5);
  const double heads0 = traj.outcomes[0] == 0 ? 1.0 : 0.0;
  CHECK(trace.steps[1][0] == doctest::Approx((1.0 + heads0) / 3.0));
  CHECK(trace.first_outcome_probabilities().size() == 100);
}

TEST_CASE("exact bayes TVD shrinks with more data") {
  const ExactBayesPredictor p;
  const auto target = DiscreteDistribution::bernoulli(0.2);
  double tvd10 = 0, tvd100 = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const auto traj = sample_trajectory(ChangepointSpec({SegmentSpec::coin(100, 0.2)}),
                                        OutcomeSpace::coin(), derive_seed(9, s));
    PredictorContext ctx;
    ctx.history.assign(traj.outcomes.begin(), traj.outcomes.begin() + 10);
    tvd10 += std::fabs(p.predict(ctx)[0] - target[0]);
    ctx.history = traj.outcomes;
    tvd100 += std::fabs(p.predict(ctx)[0] - target[0]);
  }
  CHECK(tvd100 < tvd10);
}

TEST_CASE("discounted bayes adapts after the switchover") {
  const ExactBayesPredictor exact;
  const DiscountedBayesPredictor discounted(BetaParams(), 0.5);
  int closer = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const auto traj = sample_trajectory(default_changepoint(), OutcomeSpace::coin(), derive_seed(10, s));
    const auto te = make_trace(exact, traj, {}).first_outcome_probabilities();
    const auto td = make_trace(discounted, traj, {}).first_outcome_probabilities();
    double me = 0, md = 0;
    for (std::size_t t = 89; t < 100; ++t) {
      me += te[t];
      md += td[t];
    }
    closer += std::fabs(md / 11 - 0.25) < std::fabs(me / 11 - 0.25);
  }
  CHECK(closer >= 0.95 * seeds);
}
