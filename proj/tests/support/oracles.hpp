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

// Test-side reference computations. None of these call into the library's
// numerics; they recompute the same quantities by other means.

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

namespace oracles {

/// C(n, k) exactly, for n small enough that the result fits in 64 bits.
inline std::uint64_t choose(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

/// log C(n, k) as a sum of logs of integers.
inline long double log_choose(unsigned n, unsigned k) {
  long double s = 0.0L;
  for (unsigned i = 1; i <= k; ++i) s += std::log(static_cast<long double>(n - k + i)) -
                                         std::log(static_cast<long double>(i));
  return s;
}

/// I_x(a, b) for integer a, b via P(Bin(a + b - 1, x) >= a).
inline long double binomial_tail_ibeta(unsigned a, unsigned b, long double x) {
  const unsigned n = a + b - 1;
  long double sum = 0.0L;
  for (unsigned j = a; j <= n; ++j) {
    sum += static_cast<long double>(choose(n, j)) * std::pow(x, static_cast<long double>(j)) *
           std::pow(1.0L - x, static_cast<long double>(n - j));
  }
  return sum;
}

/// log of the integral of theta^(p-1) (1-theta)^(q-1) over (0, 1), by the
/// midpoint rule after substituting theta = sin^2(pi u / 2). The substitution
/// keeps the integrand bounded for p, q >= 1/2.
struct AngleTable {
  std::vector<long double> log_sin, log_cos;
};

inline const AngleTable& angle_table(std::size_t points) {
  static std::map<std::size_t, AngleTable> tables;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto [it, fresh] = tables.try_emplace(points);
  if (fresh) {
    const long double pi = 3.141592653589793238462643383279502884L;
    const long double h = 1.0L / static_cast<long double>(points);
    it->second.log_sin.resize(points);
    it->second.log_cos.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
      const long double half_angle = 0.5L * pi * (static_cast<long double>(i) + 0.5L) * h;
      it->second.log_sin[i] = std::log(std::sin(half_angle));
      it->second.log_cos[i] = std::log(std::cos(half_angle));
    }
  }
  return it->second;
}

inline long double log_grid_beta_integral(double p, double q, std::size_t points) {
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double h = 1.0L / static_cast<long double>(points);
  const auto& t = angle_table(points);
  const long double ps = 2.0L * p - 1.0L, qs = 2.0L * q - 1.0L;
  std::vector<long double> logs(points);
  long double top = -INFINITY;
  for (std::size_t i = 0; i < points; ++i) {
    logs[i] = ps * t.log_sin[i] + qs * t.log_cos[i];
    if (logs[i] > top) top = logs[i];
  }
  long double sum = 0.0L;
  for (auto l : logs) sum += std::exp(static_cast<double>(l - top));
  return top + std::log(sum * h * pi);
}

struct GridPosterior {
  long double mean;
  long double log_marginal;
};

/// Posterior mean and log marginal likelihood of k heads in n flips under a
/// Beta(a, b) prior, by brute-force integration of likelihood x prior.
inline GridPosterior grid_posterior(double a, double b, unsigned k, unsigned n,
                                    std::size_t points = 1'000'000) {
  const long double log_prior_norm = log_grid_beta_integral(a, b, points);
  const long double log_evidence = log_grid_beta_integral(a + k, b + n - k, points);
  const long double log_first_moment = log_grid_beta_integral(a + k + 1, b + n - k, points);
  return {std::exp(log_first_moment - log_evidence),
          log_choose(n, k) + log_evidence - log_prior_norm};
}

/// Beta density at theta normalized by a midpoint-rule integral.
inline long double grid_beta_pdf(double a, double b, double theta,
                                 std::size_t points = 1'000'000) {
  const long double log_norm = log_grid_beta_integral(a, b, points);
  return std::exp((a - 1.0L) * std::log(static_cast<long double>(theta)) +
                  (b - 1.0L) * std::log1p(-static_cast<long double>(theta)) - log_norm);
}

/// Half the L1 distance, written out longhand.
inline double tvd(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return 0.5 * s;
}

/// Textbook one-pass Pearson r from raw sums, in long double.
inline long double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  const long double n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double cov = sxy - sx * sy / n;
  return cov / std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
}

}  // namespace oracles
