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

#include "coinbayes/outcome.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "coinbayes/error.hpp"

namespace coinbayes {

OutcomeSpace::OutcomeSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw InvalidArgument("outcome space needs at least two labels");
  }
  std::set<std::string_view> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw InvalidArgument("outcome labels must be non-empty");
    if (!seen.insert(l).second) throw InvalidArgument("duplicate outcome label: " + l);
  }
}

OutcomeSpace OutcomeSpace::coin() { return OutcomeSpace({"heads", "tails"}); }

OutcomeSpace OutcomeSpace::die() { return OutcomeSpace({"1", "2", "3", "4", "5", "6"}); }

const std::string& OutcomeSpace::label(std::size_t index) const {
  if (index >= labels_.size()) {
    throw InvalidArgument("outcome index " + std::to_string(index) + " out of range");
  }
  return labels_[index];
}

std::optional<std::size_t> OutcomeSpace::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> probabilities)
    : probs_(std::move(probabilities)) {
  if (probs_.size() < 2) throw InvalidArgument("distribution needs at least two outcomes");
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidArgument("distribution entries must be finite and non-negative");
    }
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw InvalidArgument("distribution does not sum to 1 (sum=" + std::to_string(total) + ")");
  }
}

DiscreteDistribution DiscreteDistribution::bernoulli(double p_first) {
  if (!(p_first >= 0.0 && p_first <= 1.0)) {
    throw InvalidArgument("bernoulli parameter must lie in [0, 1]");
  }
  return DiscreteDistribution({p_first, 1.0 - p_first});
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t size) {
  if (size < 2) throw InvalidArgument("distribution needs at least two outcomes");
  return DiscreteDistribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

DiscreteDistribution DiscreteDistribution::biased(std::size_t size, std::size_t index, double p) {
  if (size < 2 || index >= size) throw InvalidArgument("biased outcome index out of range");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("bias must lie in [0, 1]");
  if (size == 2) {
    return index == 0 ? bernoulli(p) : bernoulli(1.0 - p);
  }
  std::vector<double> probs(size, (1.0 - p) / static_cast<double>(size - 1));
  probs[index] = p;
  return DiscreteDistribution(std::move(probs));
}

}  // namespace coinbayes
