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

#include <limits>

#include "doctest.h"

#include "coinbayes/error.hpp"
#include "coinbayes/outcome.hpp"

using namespace coinbayes;

TEST_CASE("coin and die spaces") {
  const auto coin = OutcomeSpace::coin();
  CHECK(coin.size() == 2);
  CHECK(coin.label(0) == "heads");
  CHECK(coin.index_of("tails") == 1);
  CHECK_FALSE(coin.index_of("edge").has_value());
  const auto die = OutcomeSpace::die();
  CHECK(die.size() == 6);
  CHECK(die.label(5) == "6");
  CHECK_THROWS_AS(die.label(6), InvalidArgument);
}

TEST_CASE("outcome space rejects bad labels") {
  CHECK_THROWS_AS(OutcomeSpace({"heads"}), InvalidArgument);
  CHECK_THROWS_AS(OutcomeSpace({"heads", "heads"}), InvalidArgument);
  CHECK_THROWS_AS(OutcomeSpace({"heads", ""}), InvalidArgument);
}

TEST_CASE("distribution validation") {
  CHECK_NOTHROW(DiscreteDistribution({0.25, 0.75}));
  CHECK_NOTHROW(DiscreteDistribution({0.5, 0.5 + 5e-10}));
  CHECK_THROWS_AS(DiscreteDistribution({0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(DiscreteDistribution({-0.1, 1.1}), InvalidArgument);
  CHECK_THROWS_AS(DiscreteDistribution({1.0}), InvalidArgument);
  CHECK_THROWS_AS(DiscreteDistribution({std::numeric_limits<double>::quiet_NaN(), 1.0}), InvalidArgument);
}

TEST_CASE("distribution factories") {
  const auto b = DiscreteDistribution::bernoulli(0.7);
  CHECK(b[0] == 0.7);
  CHECK(b[1] == doctest::Approx(0.3));
  const auto u = DiscreteDistribution::uniform(4);
  for (double p : u.probabilities()) CHECK(p == 0.25);
  const auto d = DiscreteDistribution::biased(6, 2, 0.5);
  CHECK(d[2] == 0.5);
  CHECK(d[0] == doctest::Approx(0.1));
  CHECK(DiscreteDistribution::biased(2, 0, 0.3) == DiscreteDistribution::bernoulli(0.3));
  CHECK_THROWS_AS(DiscreteDistribution::bernoulli(1.5), InvalidArgument);
}
