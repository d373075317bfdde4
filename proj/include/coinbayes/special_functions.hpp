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

#include <cstdint>

namespace coinbayes {

/// log B(a, b) for a, b > 0.
double log_beta(double a, double b);

/// log C(n, k) for 0 <= k <= n.
double log_choose(std::uint64_t n, std::uint64_t k);

/// Iteration cap and relative convergence tolerance of the continued fraction.
inline constexpr int kIncompleteBetaMaxIterations = 500;
inline constexpr double kIncompleteBetaTolerance = 1e-12;

/**
 * Regularized incomplete beta function I_x(a, b), the CDF of Beta(a, b) at x.
 *
 * Evaluated with the modified Lentz algorithm on the standard continued
 * fraction. For x above the mean a / (a + b) the symmetric form
 * I_x(a, b) = 1 - I_{1-x}(b, a) is used so the fraction converges quickly.
 * Throws ConvergenceError if the fraction has not converged after
 * kIncompleteBetaMaxIterations terms, and InvalidArgument for a, b <= 0 or
 * x outside [0, 1].
 */
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace coinbayes
