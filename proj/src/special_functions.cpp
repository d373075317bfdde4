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

#include "coinbayes/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "coinbayes/error.hpp"

namespace coinbayes {
namespace {

constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b) * a / front, valid and fast for x < a / (a + b).
double incomplete_beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kIncompleteBetaMaxIterations; ++m) {
    const double dm = m;
    const double m2 = 2.0 * dm;
    // even step
    double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    // odd step
    aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kIncompleteBetaTolerance) return h;
  }
  throw ConvergenceError("incomplete beta continued fraction did not converge for a=" +
                         std::to_string(a) + " b=" + std::to_string(b) +
                         " x=" + std::to_string(x));
}

}  // namespace

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("log_beta requires a, b > 0");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw InvalidArgument("log_choose requires k <= n");
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);
  return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidArgument("incomplete beta requires finite a, b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < a / (a + b)) {
    return std::exp(log_front) * incomplete_beta_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * incomplete_beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw InvalidArgument("t distribution needs dof > 0");
  if (std::isnan(t)) throw InvalidArgument("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

}  // namespace coinbayes
