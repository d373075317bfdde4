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
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "doctest.h"
#include "oracles.hpp"

#include "coinbayes/error.hpp"
#include "coinbayes/metrics.hpp"
#include "coinbayes/rng.hpp"

using namespace coinbayes;

namespace {

DiscreteDistribution random_distribution(std::mt19937_64& gen, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) s += v = e(gen);
  for (auto& v : p) v /= s;
  return DiscreteDistribution(p);
}

AttentionObservation observation(std::string id, std::size_t k, double a1, double a2, double est,
                                 BetaParams posterior, std::size_t n = 100) {
  return {{std::move(id), k, a1, a2, est}, n - k, posterior};
}

}  // namespace

TEST_CASE("tvd examples") {
  const auto p = DiscreteDistribution::bernoulli(0.7);
  CHECK(tvd(p, p) == 0.0);
  CHECK(tvd(DiscreteDistribution({1.0, 0.0}), DiscreteDistribution({0.0, 1.0})) == 1.0);
  CHECK(tvd(p, DiscreteDistribution::uniform(2)) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(tvd(p, DiscreteDistribution::uniform(3)), InvalidArgument);
}

TEST_CASE("tvd axioms") {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 2 + gen() % 6;
    const auto p = random_distribution(gen, n), q = random_distribution(gen, n),
               r = random_distribution(gen, n);
    const double pq = tvd(p, q);
    CHECK(pq == tvd(q, p));
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0);
    CHECK(pq <= tvd(p, r) + tvd(r, q) + 1e-12);
    CHECK(pq == doctest::Approx(oracles::tvd({p.probabilities().begin(), p.probabilities().end()},
                                             {q.probabilities().begin(), q.probabilities().end()}))
                    .epsilon(1e-15));
  }
}

TEST_CASE("binary tvd is the difference of heads probabilities") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(gen), b = u(gen);
    CHECK(std::fabs(tvd(DiscreteDistribution::bernoulli(a), DiscreteDistribution::bernoulli(b)) -
                    std::fabs(a - b)) <= 1e-12);
  }
}

TEST_CASE("cdf extremity") {
  CHECK(cdf_extremity(0.3, BetaParams()) == doctest::Approx(0.3));
  CHECK(std::fabs(cdf_extremity(0.5, BetaParams(8, 4)) - 0.11328125) < 1e-12);
  CHECK(cdf_extremity(0.5, BetaParams(6, 6)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pearson examples") {
  std::vector<double> x{1, 2, 3}, y{2, 4, 6};
  const auto r = pearson(x, y);
  CHECK(r.r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.p_value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.n == 3);
  std::vector<double> xo{-1, 0, 1, 0}, yo{1, -2, 1, 0};
  const auto z = pearson(xo, yo);
  CHECK(std::fabs(z.r) < 1e-15);
  CHECK(std::fabs(z.p_value - 1.0) < 1e-9);
  std::vector<double> flat{1, 1, 1};
  CHECK_THROWS_AS(pearson(flat, y), ZeroVarianceError);
  std::vector<double> two{1, 2};
  CHECK_THROWS_AS(pearson(two, two), InvalidArgument);
}

TEST_CASE("pearson against direct recomputation and the t distribution") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 5 + gen() % 200;
    std::vector<double> x(n), y(n);
    const double rho = (gen() % 200) / 100.0 - 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = norm(gen);
      y[j] = rho * x[j] + norm(gen);
    }
    const auto res = pearson(x, y);
    CHECK(std::fabs(res.r - static_cast<double>(oracles::pearson_r(x, y))) < 1e-12);
    const double dof = n - 2.0;
    const double t = res.r * std::sqrt(dof / (1.0 - res.r * res.r));
    boost::math::students_t dist(dof);
    const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    CHECK(std::fabs(res.p_value - expected) < 1e-9);
  }
}

TEST_CASE("independent samples are nearly uncorrelated") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::vector<double> x(10000), y(10000);
  for (auto& v : x) v = norm(gen);
  for (auto& v : y) v = norm(gen);
  CHECK(std::fabs(pearson(x, y).r) < 0.05);
}

TEST_CASE("aggregate_tvd") {
  std::vector<TvdRecord> one{{{"p", 0.3, 0, 0}, 0.42}};
  const auto s1 = aggregate_tvd(one);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0].mean == 0.42);
  CHECK(s1[0].std == 0.0);
  std::vector<TvdRecord> two{{{"p", 0.3, 0, 0}, 0.1}, {{"p", 0.3, 0, 1}, 0.3}};
  const auto s2 = aggregate_tvd(two);
  REQUIRE(s2.size() == 1);
  CHECK(s2[0].mean == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(s2[0].std == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(aggregate_tvd(two, true).size() == 2);

  std::vector<TvdRecord> grid;
  for (int b = 0; b <= 10; ++b) {
    for (std::size_t prompt = 0; prompt < 50; ++prompt) {
      grid.push_back({{"fixed", b / 10.0, 0, prompt}, 0.1 * 3});
    }
  }
  const auto s = aggregate_tvd(grid);
  REQUIRE(s.size() == 11);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].count == 50);
    CHECK(s[i].mean == 0.1 * 3);
    if (i > 0) CHECK(s[i - 1].key.bias < s[i].key.bias);
  }
}

TEST_CASE("attention csv parsing") {
  std::istringstream in(
      "trial_id,K,attn_seg1,attn_seg2,point_estimate\n"
      "a,50,0.4,0.6,0.3\n"
      "b,50,-1,0.6,0.3\n"
      "c,50,0.4\n"
      "\n"
      "d,x,0.4,0.6,0.3\n"
      "e,10,0.1,0.2,1.5\n"
      "f,90,0.1,0.2,0.5\n");
  const auto csv = read_attention_csv(in);
  CHECK(csv.records.size() == 2);
  REQUIRE(csv.errors.size() == 4);
  CHECK(csv.errors[0].rfind("line 3:", 0) == 0);
  CHECK(csv.errors[1].rfind("line 4:", 0) == 0);
  CHECK(csv.errors[2].rfind("line 6:", 0) == 0);
  CHECK(csv.errors[3].rfind("line 7:", 0) == 0);
  std::istringstream bad_header("id,K\n");
  CHECK(read_attention_csv(bad_header).errors.size() == 1);
}

TEST_CASE("attention analysis: perfect correlation") {
  std::vector<AttentionObservation> obs;
  const BetaParams posterior(40, 62);
  for (int i = 0; i < 20; ++i) {
    const double est = 0.2 + 0.02 * i;
    const double ext = cdf_extremity(est, posterior);
    obs.push_back(observation(std::to_string(i), 50, ext, ext, est, posterior));
  }
  const auto a = attention_analysis(obs);
  REQUIRE(a.seg1.has_value());
  REQUIRE(a.seg2.has_value());
  CHECK(a.seg1->r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.seg2->r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.fractions.size() == 20);
  CHECK(a.fractions[0].fraction_seg1 == 0.5);
}

TEST_CASE("attention analysis: independent draws") {
  Rng rng(5);
  std::vector<AttentionObservation> obs;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 10 * (1 + i % 9);
    const double heads = std::floor(100 * rng.uniform());
    const BetaParams posterior(1 + heads, 101 - heads);
    obs.push_back(observation(std::to_string(i), k, rng.uniform(), rng.uniform(), rng.uniform(), posterior));
  }
  const auto a = attention_analysis(obs);
  CHECK(std::fabs(a.seg1->r) < 0.1);
  CHECK(std::fabs(a.seg2->r) < 0.1);
  CHECK(a.fits.size() == 9);
}

TEST_CASE("attention analysis: degenerate inputs") {
  std::vector<AttentionObservation> two{observation("a", 50, 1, 1, 0.5, BetaParams()),
                                        observation("b", 50, 1, 2, 0.5, BetaParams())};
  CHECK_THROWS_AS(attention_analysis(two), InvalidArgument);

  std::vector<AttentionObservation> all_k_eq_n;
  for (int i = 0; i < 5; ++i) {
    all_k_eq_n.push_back(observation(std::to_string(i), 100, 0.1 * (i + 1), 0.0, 0.1 * (i + 1),
                                     BetaParams(76, 26)));
  }
  const auto a = attention_analysis(all_k_eq_n);
  CHECK(a.seg1.has_value());
  CHECK_FALSE(a.seg2.has_value());
  CHECK(a.fits.empty());
  bool skipped = false;
  for (const auto& r : a.report) skipped |= r.find("M=0") != std::string::npos;
  CHECK(skipped);

  std::vector<AttentionObservation> zero{observation("a", 50, 0, 0, 0.2, BetaParams(3, 4)),
                                         observation("b", 50, 1, 1, 0.4, BetaParams(3, 4)),
                                         observation("c", 50, 2, 1, 0.6, BetaParams(3, 4))};
  const auto z = attention_analysis(zero);
  CHECK(z.fractions.size() == 2);
  bool reported = false;
  for (const auto& r : z.report) reported |= r.find("zero total attention") != std::string::npos;
  CHECK(reported);
}

TEST_CASE("quadratic fit") {
  std::vector<double> x{0, 1, 2, 3, 4}, y;
  for (double v : x) y.push_back(1.5 - 2.0 * v + 0.25 * v * v);
  const auto c = fit_quadratic(x, y);
  REQUIRE(c.has_value());
  CHECK((*c)[0] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK((*c)[1] == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK((*c)[2] == doctest::Approx(0.25).epsilon(1e-10));
  std::vector<double> few{1, 1, 2, 2}, fy{1, 2, 3, 4};
  CHECK_FALSE(fit_quadratic(few, fy).has_value());
}
