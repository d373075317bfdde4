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
#include <span>
#include <vector>

#include "coinbayes/outcome.hpp"

namespace coinbayes {

/// Beta(alpha, beta) posterior state. Both parameters are finite and > 0.
class BetaParams {
 public:
  BetaParams() = default;  // Beta(1, 1), the uniform prior
  BetaParams(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  bool operator==(const BetaParams&) const = default;

 private:
  double alpha_ = 1.0;
  double beta_ = 1.0;
};

/// Dirichlet concentration vector; at least two entries, all finite and > 0.
class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> concentration);

  /// Dir(1, ..., 1) over `size` outcomes.
  static DirichletParams uniform(std::size_t size);
  static DirichletParams from_beta(const BetaParams& params);

  std::size_t size() const noexcept { return concentration_.size(); }
  std::span<const double> concentration() const noexcept { return concentration_; }
  double operator[](std::size_t i) const { return concentration_[i]; }

  bool operator==(const DirichletParams&) const = default;

 private:
  std::vector<double> concentration_;
};

/// k heads out of n flips, 0 <= k <= n.
class ObservationCounts {
 public:
  ObservationCounts(std::uint64_t heads, std::uint64_t total);

  std::uint64_t heads() const noexcept { return heads_; }
  std::uint64_t tails() const noexcept { return total_ - heads_; }
  std::uint64_t total() const noexcept { return total_; }

 private:
  std::uint64_t heads_;
  std::uint64_t total_;
};

/// Validates gamma in (0, 1]. Zero would erase the prior entirely.
double checked_discount(double gamma);

/// Discounted Beta filter. gamma = 1 is classical sequential updating.
struct BetaFilterState {
  BetaParams params;
  double gamma = 1.0;
};

struct DirichletFilterState {
  DirichletParams params;
  double gamma = 1.0;
};

/// Conjugate update Beta(alpha + k, beta + n - k).
BetaParams posterior_update(const BetaParams& prior, const ObservationCounts& counts);

/// alpha <- gamma * alpha + [heads], beta <- gamma * beta + [tails].
/// Outcome index 0 is heads, 1 is tails.
BetaFilterState filter_step(const BetaFilterState& state, std::size_t observation);

/// Every concentration decays by gamma, then the observed entry gains 1.
DirichletFilterState filter_step(const DirichletFilterState& state, std::size_t observation);

/// Folds filter_step over a sequence of observations.
BetaFilterState filter(BetaFilterState state, std::span<const std::size_t> observations);

/// alpha / (alpha + beta).
double posterior_mean(const BetaParams& params);

/// Beta density at theta, evaluated in log space. Returns +infinity where the
/// density diverges (alpha < 1 at 0, beta < 1 at 1).
double posterior_pdf(const BetaParams& params, double theta);

/// Beta CDF at theta (regularized incomplete beta).
double posterior_cdf(const BetaParams& params, double theta);

/// log p(D) = log[ C(n, k) B(alpha + k, beta + n - k) / B(alpha, beta) ].
double log_marginal_likelihood(const BetaParams& prior, const ObservationCounts& counts);

DirichletParams dirichlet_update(const DirichletParams& prior,
                                 std::span<const std::uint64_t> counts);

/// Posterior predictive: the normalized concentration vector.
DiscreteDistribution predictive(const DirichletParams& params);

/// Posterior predictive over {heads, tails}.
DiscreteDistribution predictive(const BetaParams& params);

}  // namespace coinbayes
