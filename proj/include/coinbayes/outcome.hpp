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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coinbayes {

/// Ordered, distinct outcome labels of a stochastic process. Index order is
/// the order used by every probability vector over this space.
class OutcomeSpace {
 public:
  explicit OutcomeSpace(std::vector<std::string> labels);

  /// {"heads", "tails"}; index 0 is heads.
  static OutcomeSpace coin();
  /// {"1", ..., "6"}.
  static OutcomeSpace die();

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t index) const;
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;
  bool contains(std::size_t index) const noexcept { return index < labels_.size(); }

  bool operator==(const OutcomeSpace&) const = default;

 private:
  std::vector<std::string> labels_;
};

/// Normalized probability vector: entries >= 0 summing to 1 within 1e-9.
class DiscreteDistribution {
 public:
  static constexpr double kNormalizationTolerance = 1e-9;

  explicit DiscreteDistribution(std::vector<double> probabilities);

  /// Two-outcome distribution (p, 1 - p).
  static DiscreteDistribution bernoulli(double p_first);
  static DiscreteDistribution uniform(std::size_t size);
  /// Mass `p` on `index`, the rest spread evenly over the other outcomes.
  static DiscreteDistribution biased(std::size_t size, std::size_t index, double p);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  double at(std::size_t i) const { return probs_.at(i); }
  std::span<const double> probabilities() const noexcept { return probs_; }

  bool operator==(const DiscreteDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

}  // namespace coinbayes
