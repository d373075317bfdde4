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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coinbayes/oracle.hpp"
#include "coinbayes/predictors.hpp"
#include "coinbayes/trajectory.hpp"

namespace coinbayes {

/// A prediction trace together with the trajectory it was produced on.
struct TracedTrajectory {
  PredictionTrace trace;
  Trajectory trajectory;
};

struct FitOptions {
  double lower = 1e-3;
  double upper = 1.0;
  /// Absolute tolerance on gamma.
  double tol = 1e-4;
  std::size_t grid_points = 64;
  /// Grid objective ranges below this are treated as flat.
  double flat_threshold = 1e-12;
};

struct GammaFitResult {
  /// Empty when gamma is not identifiable from the traces.
  std::optional<double> gamma_star;
  double objective_value = 0.0;
  std::size_t evaluations = 0;
  BetaParams prior;
  bool converged = false;
  std::string note;

  bool identifiable() const noexcept { return gamma_star.has_value(); }
};

/**
 * Mean squared difference between the trace's P(heads) and the discounted
 * filter's posterior mean, step by step. The filter's mean at step t has seen
 * outcomes [0, t), matching the predict-then-observe trace convention.
 */
double gamma_objective(double gamma, const PredictionTrace& trace, const Trajectory& trajectory,
                       const BetaParams& prior);

/// Average of the per-trajectory objectives.
double gamma_objective(double gamma, std::span<const TracedTrajectory> data,
                       const BetaParams& prior);

/**
 * Finds the discount factor that best explains the traces.
 *
 * Evaluates the objective on an evenly spaced grid over [lower, upper],
 * brackets the best grid point by its neighbours and refines inside the
 * bracket with Brent's golden-section/parabolic search. The result is never
 * worse than the best grid point. Traces that never move, or an objective that
 * is flat over the grid, are reported as non-identifiable.
 */
GammaFitResult fit_gamma(std::span<const TracedTrajectory> data, const BetaParams& prior = {},
                         const FitOptions& options = {});
GammaFitResult fit_gamma(const PredictionTrace& trace, const Trajectory& trajectory,
                         const BetaParams& prior = {}, const FitOptions& options = {});

/// Evenly spaced grid used by fit_gamma's bracketing stage.
std::vector<double> gamma_grid(const FitOptions& options);

struct GammaTableRow {
  std::string predictor_id;
  GammaFitResult fit;
};

/// predictor,gamma_star,objective,evaluations,converged,identifiable
void write_gamma_table_csv(std::ostream& out, std::span<const GammaTableRow> rows);
/// Column-aligned text table, one predictor per line.
void write_gamma_table_text(std::ostream& out, std::span<const GammaTableRow> rows);

}  // namespace coinbayes
