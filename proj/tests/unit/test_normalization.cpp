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

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "coinbayes/error.hpp"
#include "coinbayes/normalization.hpp"

using namespace coinbayes;

TEST_CASE("outcome_probability chains token log-probabilities") {
  CHECK(outcome_probability(TokenizedOutcome(0, {-0.5, -1.0})) ==
        doctest::Approx(0.223130).epsilon(1e-6));
  CHECK(outcome_probability(TokenizedOutcome(0, {0.0})) == 1.0);
  CHECK(outcome_probability(TokenizedOutcome(0, {-0.25, -0.5})) ==
        outcome_probability(TokenizedOutcome(0, {-0.75})));
  CHECK_THROWS_AS(TokenizedOutcome(0, {}), InvalidArgument);
  CHECK_THROWS_AS(TokenizedOutcome(0, {-0.1, 0.2}), InvalidArgument);
}

TEST_CASE("outcome_probability is invariant to token segmentation") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double total = -5.0 * u(gen);
    const double split = u(gen);
    const double whole = outcome_probability(TokenizedOutcome(0, {total}));
    const double parts = outcome_probability(TokenizedOutcome(0, {total * split, total * (1 - split)}));
    CHECK(parts == doctest::Approx(whole).epsilon(1e-14));
  }
}

TEST_CASE("linear renormalization") {
  std::vector<double> raw{0.02, 0.01, 0.01};
  const auto d = renormalize_linear(raw);
  CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(0.25).epsilon(1e-15));
  std::vector<double> normalized{0.2, 0.3, 0.5};
  const auto same = renormalize_linear(normalized);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same[i] == doctest::Approx(normalized[i]).epsilon(1e-15));
  std::vector<double> tiny{1e-9, 1e-12};
  const auto t = renormalize_linear(tiny);
  CHECK(t[0] == doctest::Approx(1000.0 / 1001.0).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(1.0 / 1001.0).epsilon(1e-12));
}

TEST_CASE("linear renormalization errors") {
  std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_AS(renormalize_linear(zeros), ZeroSupportError);
  try {
    renormalize_linear(zeros);
  } catch (const ZeroSupportError& e) {
    CHECK(std::string(e.what()) == "model assigns no mass to any outcome");
  }
  std::vector<double> bad{1.5, 0.1};
  CHECK_THROWS_AS(renormalize_linear(bad), InvalidArgument);
  std::vector<double> zero_one{0.0, 0.3};
  const auto d = renormalize_linear(zero_one);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 1.0);
}

TEST_CASE("linear renormalization preserves ratios") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> logu(-40.0, 0.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> raw(2 + gen() % 5);
    for (auto& r : raw) r = std::exp(logu(gen));
    const auto d = renormalize_linear(raw);
    for (std::size_t j = 1; j < raw.size(); ++j) {
      CHECK(d[0] / d[j] == doctest::Approx(raw[0] / raw[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("log-space renormalization") {
  std::vector<double> logs{-0.105, -2.303};
  const auto r = renormalize_linear_log(logs);
  CHECK(r.distribution[0] == doctest::Approx(0.900).epsilon(1e-3));
  CHECK(r.distribution[1] == doctest::Approx(0.100).epsilon(1e-2));
  CHECK(r.clamped == 0);
  std::vector<double> long_chain{-600.0, -601.0};
  const auto lc = renormalize_linear_log(long_chain);
  CHECK(lc.distribution[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
  CHECK(lc.clamped == 0);
  std::vector<double> below_floor{-800.0, -801.0};
  const auto bf = renormalize_linear_log(below_floor);
  CHECK(bf.clamped == 2);
  CHECK(bf.distribution[0] == 0.5);
  std::vector<double> with_floor{-1.0, -1000.0};
  const auto f = renormalize_linear_log(with_floor);
  CHECK(f.clamped == 1);
  CHECK(f.distribution[1] > 0.0);
  std::vector<double> with_zero{-1.0, -INFINITY};
  const auto z = renormalize_linear_log(with_zero);
  CHECK(z.distribution[1] == 0.0);
  CHECK(z.clamped == 0);
  std::vector<double> none{-INFINITY, -INFINITY};
  CHECK_THROWS_AS(renormalize_linear_log(none), ZeroSupportError);
}

TEST_CASE("clamp counter on raw values") {
  std::vector<double> raw{0.5, 1e-320};
  const auto r = renormalize_linear_checked(raw);
  CHECK(r.clamped == 1);
  CHECK(r.distribution[1] > 0.0);
}

TEST_CASE("softmax") {
  std::vector<double> tiny{1e-9, 1e-12};
  const auto s = renormalize_softmax(tiny);
  CHECK(std::fabs(s[0] - 0.5 - 2.4975e-10) < 1e-13);
  std::vector<double> zeros{0.0, 0.0};
  CHECK(renormalize_softmax(zeros)[0] == 0.5);
  std::vector<double> one_zero{1.0, 0.0};
  const auto e = renormalize_softmax(one_zero);
  CHECK(e[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-14));
}

TEST_CASE("softmax pathology against linear renormalization") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1e-6);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> raw(2 + gen() % 5);
    for (auto& r : raw) r = u(gen);
    raw[0] = 1e-6;
    const auto soft = renormalize_softmax(raw);
    const auto lin = renormalize_linear(raw);
    const double uniform = 1.0 / raw.size();
    for (std::size_t j = 0; j < raw.size(); ++j) CHECK(std::fabs(soft[j] - uniform) <= 1e-6);
    for (std::size_t j = 1; j < raw.size(); ++j) {
      if (raw[j] > 0) CHECK(lin[0] / lin[j] == doctest::Approx(raw[0] / raw[j]).epsilon(1e-12));
    }
  }
}
