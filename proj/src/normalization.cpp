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

#include "coinbayes/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coinbayes/error.hpp"

namespace coinbayes {

TokenizedOutcome::TokenizedOutcome(std::size_t outcome, std::vector<double> token_logprobs)
    : outcome(outcome), token_logprobs(std::move(token_logprobs)) {
  if (this->token_logprobs.empty()) {
    throw InvalidArgument("tokenized outcome needs at least one token");
  }
  for (double lp : this->token_logprobs) {
    if (std::isnan(lp) || lp > 0.0) throw InvalidArgument("token log-probabilities must be <= 0");
  }
}

double outcome_log_probability(const TokenizedOutcome& tok) {
  return std::accumulate(tok.token_logprobs.begin(), tok.token_logprobs.end(), 0.0);
}

double outcome_probability(const TokenizedOutcome& tok) {
  return std::exp(outcome_log_probability(tok));
}

Renormalized renormalize_linear_checked(std::span<const double> raw) {
  if (raw.size() < 2) throw InvalidArgument("support needs at least two outcomes");
  std::vector<double> values(raw.begin(), raw.end());
  std::size_t clamped = 0;
  for (double& v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("raw probabilities must lie in [0, 1]");
    if (v > 0.0 && v < kProbabilityFloor) {
      v = kProbabilityFloor;
      ++clamped;
    }
  }
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  if (total == 0.0) throw ZeroSupportError();
  for (double& v : values) v /= total;
  return {DiscreteDistribution(std::move(values)), clamped};
}

DiscreteDistribution renormalize_linear(std::span<const double> raw) {
  return renormalize_linear_checked(raw).distribution;
}

Renormalized renormalize_linear_log(std::span<const double> log_probs) {
  if (log_probs.size() < 2) throw InvalidArgument("support needs at least two outcomes");
  const double floor = std::log(kProbabilityFloor);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(log_probs.begin(), log_probs.end());
  std::size_t clamped = 0;
  for (double& l : logs) {
    if (std::isnan(l) || l > 0.0) throw InvalidArgument("log-probabilities must be <= 0");
    if (l != neg_inf && l < floor) {
      l = floor;
      ++clamped;
    }
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  if (top == neg_inf) throw ZeroSupportError();
  std::vector<double> weights;
  weights.reserve(logs.size());
  for (double l : logs) weights.push_back(std::exp(l - top));
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return {DiscreteDistribution(std::move(weights)), clamped};
}

DiscreteDistribution renormalize_softmax(std::span<const double> raw) {
  if (raw.size() < 2) throw InvalidArgument("support needs at least two outcomes");
  for (double v : raw) {
    if (!std::isfinite(v)) throw InvalidArgument("softmax inputs must be finite");
  }
  const double top = *std::max_element(raw.begin(), raw.end());
  std::vector<double> weights;
  weights.reserve(raw.size());
  for (double v : raw) weights.push_back(std::exp(v - top));
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return DiscreteDistribution(std::move(weights));
}

}  // namespace coinbayes
