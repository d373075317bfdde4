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

#include "coinbayes/oracle.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "coinbayes/error.hpp"
#include "coinbayes/special_functions.hpp"

namespace coinbayes {
namespace {

bool valid_concentration(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

BetaParams::BetaParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!valid_concentration(alpha) || !valid_concentration(beta)) {
    throw InvalidArgument("Beta parameters must be finite and > 0");
  }
}

DirichletParams::DirichletParams(std::vector<double> concentration)
    : concentration_(std::move(concentration)) {
  if (concentration_.size() < 2) throw InvalidArgument("Dirichlet needs at least two outcomes");
  for (double c : concentration_) {
    if (!valid_concentration(c)) {
      throw InvalidArgument("Dirichlet concentrations must be finite and > 0");
    }
  }
}

DirichletParams DirichletParams::uniform(std::size_t size) {
  return DirichletParams(std::vector<double>(size, 1.0));
}

DirichletParams DirichletParams::from_beta(const BetaParams& params) {
  return DirichletParams({params.alpha(), params.beta()});
}

ObservationCounts::ObservationCounts(std::uint64_t heads, std::uint64_t total)
    : heads_(heads), total_(total) {
  if (heads > total) {
    throw InvalidArgument("observation counts need k <= n (k=" + std::to_string(heads) +
                          ", n=" + std::to_string(total) + ")");
  }
}

double checked_discount(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("discount factor must lie in (0, 1]");
  }
  return gamma;
}

BetaParams posterior_update(const BetaParams& prior, const ObservationCounts& counts) {
  return BetaParams(prior.alpha() + static_cast<double>(counts.heads()),
                    prior.beta() + static_cast<double>(counts.tails()));
}

BetaFilterState filter_step(const BetaFilterState& state, std::size_t observation) {
  if (observation > 1) throw InvalidArgument("coin observation must be 0 (heads) or 1 (tails)");
  const double gamma = checked_discount(state.gamma);
  const double heads = observation == 0 ? 1.0 : 0.0;
  return {BetaParams(gamma * state.params.alpha() + heads,
                     gamma * state.params.beta() + (1.0 - heads)),
          gamma};
}

DirichletFilterState filter_step(const DirichletFilterState& state, std::size_t observation) {
  if (observation >= state.params.size()) {
    throw InvalidArgument("observation index out of range for Dirichlet state");
  }
  const double gamma = checked_discount(state.gamma);
  std::vector<double> next(state.params.concentration().begin(),
                           state.params.concentration().end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = gamma * next[i] + (i == observation ? 1.0 : 0.0);
  }
  return {DirichletParams(std::move(next)), gamma};
}

BetaFilterState filter(BetaFilterState state, std::span<const std::size_t> observations) {
  for (std::size_t obs : observations) state = filter_step(state, obs);
  return state;
}

double posterior_mean(const BetaParams& params) {
  return params.alpha() / (params.alpha() + params.beta());
}

double posterior_pdf(const BetaParams& params, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  const double a = params.alpha();
  const double b = params.beta();
  // (a - 1) * log(0) is NaN when a == 1; treat the factor as exactly 1 there.
  auto log_power = [](double exponent, double base) {
    if (exponent == 0.0) return 0.0;
    if (base == 0.0) {
      return exponent > 0.0 ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
    }
    return exponent * std::log(base);
  };
  const double lhs = log_power(a - 1.0, theta);
  const double rhs = theta == 1.0 ? log_power(b - 1.0, 0.0)
                                  : (b == 1.0 ? 0.0 : (b - 1.0) * std::log1p(-theta));
  const double log_density = lhs + rhs - log_beta(a, b);
  return std::exp(log_density);
}

double posterior_cdf(const BetaParams& params, double theta) {
  return regularized_incomplete_beta(params.alpha(), params.beta(), theta);
}

double log_marginal_likelihood(const BetaParams& prior, const ObservationCounts& counts) {
  const double k = static_cast<double>(counts.heads());
  const double tails = static_cast<double>(counts.tails());
  return log_choose(counts.total(), counts.heads()) +
         log_beta(prior.alpha() + k, prior.beta() + tails) - log_beta(prior.alpha(), prior.beta());
}

DirichletParams dirichlet_update(const DirichletParams& prior,
                                 std::span<const std::uint64_t> counts) {
  if (counts.size() != prior.size()) {
    throw InvalidArgument("count vector has " + std::to_string(counts.size()) +
                          " entries, Dirichlet has " + std::to_string(prior.size()));
  }
  std::vector<double> next(prior.concentration().begin(), prior.concentration().end());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += static_cast<double>(counts[i]);
  return DirichletParams(std::move(next));
}

DiscreteDistribution predictive(const DirichletParams& params) {
  const auto conc = params.concentration();
  const double total = std::accumulate(conc.begin(), conc.end(), 0.0);
  std::vector<double> probs;
  probs.reserve(conc.size());
  for (double c : conc) probs.push_back(c / total);
  return DiscreteDistribution(std::move(probs));
}

DiscreteDistribution predictive(const BetaParams& params) {
  const double total = params.alpha() + params.beta();
  return DiscreteDistribution({params.alpha() / total, params.beta() / total});
}

}  // namespace coinbayes
