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
#include <span>
#include <vector>

#include "coinbayes/outcome.hpp"

namespace coinbayes {

/// Per-token conditional log-probabilities of one outcome's continuation.
struct TokenizedOutcome {
  std::size_t outcome;
  std::vector<double> token_logprobs;

  TokenizedOutcome(std::size_t outcome, std::vector<double> token_logprobs);
};

/// Raw values below this are lifted to it before linear renormalization.
inline constexpr double kProbabilityFloor = 1e-300;

/// Sum of the token log-probabilities: the chain-rule log-probability of the
/// whole continuation.
double outcome_log_probability(const TokenizedOutcome& tok);
double outcome_probability(const TokenizedOutcome& tok);

struct Renormalized {
  DiscreteDistribution distribution;
  /// Entries that were lifted to kProbabilityFloor.
  std::size_t clamped = 0;
};

/// p_i / sum_j p_j. Entries must lie in [0, 1]; exact zeros stay zero.
/// Throws ZeroSupportError when every entry is zero.
Renormalized renormalize_linear_checked(std::span<const double> raw);
DiscreteDistribution renormalize_linear(std::span<const double> raw);

/// Linear renormalization of probabilities given as logs. Avoids underflow on
/// long token chains by shifting by the maximum before exponentiating;
/// -infinity entries are exact zeros.
Renormalized renormalize_linear_log(std::span<const double> log_probs);

/**
 * exp(p_i) / sum_j exp(p_j) over raw probabilities.
 *
 * Kept to document why experiments do not use it: for raw values near zero
 * every exp(p_i) is close to 1 and the output collapses towards uniform
 * regardless of the ratios between the inputs.
 */
DiscreteDistribution renormalize_softmax(std::span<const double> raw);

}  // namespace coinbayes
