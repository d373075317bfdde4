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

#include "coinbayes/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "coinbayes/error.hpp"

namespace coinbayes {
namespace {

constexpr std::uintmax_t kMaxBrentIterations = 200;

bool trace_is_constant(std::span<const TracedTrajectory> data, double threshold) {
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& d : data) {
    for (const auto& step : d.trace.steps) {
      lo = std::min(lo, step[0]);
      hi = std::max(hi, step[0]);
    }
  }
  return hi - lo < threshold;
}

// Bits of precision for boost's Brent search giving roughly `tol` absolute
// accuracy on a parameter no larger than 1.
int brent_bits(double tol) {
  const int bits = static_cast<int>(std::ceil(1.0 - std::log2(tol / 2.0)));
  return std::clamp(bits, 8, std::numeric_limits<double>::digits / 2);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

double gamma_objective(double gamma, const PredictionTrace& trace, const Trajectory& trajectory,
                       const BetaParams& prior) {
  checked_discount(gamma);
  const auto& outcomes = trajectory.outcomes;
  if (trace.steps.size() != outcomes.size()) {
    throw InvalidArgument(fmt::format("trace has {} steps, trajectory has {}", trace.steps.size(),
                                      outcomes.size()));
  }
  if (outcomes.empty()) throw InvalidArgument("cannot fit an empty trajectory");
  BetaFilterState state{prior, gamma};
  double sum = 0.0;
  for (std::size_t t = 0; t < outcomes.size(); ++t) {
    const double diff = trace.steps[t][0] - posterior_mean(state.params);
    sum += diff * diff;
    state = filter_step(state, outcomes[t]);
  }
  return sum / static_cast<double>(outcomes.size());
}

double gamma_objective(double gamma, std::span<const TracedTrajectory> data,
                       const BetaParams& prior) {
  if (data.empty()) throw InvalidArgument("no traces to fit");
  double sum = 0.0;
  for (const auto& d : data) sum += gamma_objective(gamma, d.trace, d.trajectory, prior);
  return sum / static_cast<double>(data.size());
}

std::vector<double> gamma_grid(const FitOptions& options) {
  if (!(options.lower > 0.0 && options.lower < options.upper && options.upper <= 1.0)) {
    throw InvalidArgument("gamma bounds must satisfy 0 < lower < upper <= 1");
  }
  if (options.grid_points < 2) throw InvalidArgument("gamma grid needs at least two points");
  std::vector<double> grid(options.grid_points);
  const double step = (options.upper - options.lower) / static_cast<double>(options.grid_points - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = options.lower + step * static_cast<double>(i);
  }
  grid.back() = options.upper;
  return grid;
}

GammaFitResult fit_gamma(std::span<const TracedTrajectory> data, const BetaParams& prior,
                         const FitOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("fit tolerance must be positive");
  GammaFitResult result;
  result.prior = prior;
  const auto grid = gamma_grid(options);

  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = gamma_objective(grid[i], data, prior);
  result.evaluations = grid.size();

  if (trace_is_constant(data, options.flat_threshold)) {
    result.note = "non-identifiable: prediction trace is constant";
    result.objective_value = *std::min_element(values.begin(), values.end());
    return result;
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (*hi_it - *lo_it < options.flat_threshold) {
    result.note = "non-identifiable: objective is flat over the gamma grid";
    result.objective_value = *lo_it;
    return result;
  }

  const auto best = static_cast<std::size_t>(lo_it - values.begin());
  const double left = grid[best == 0 ? 0 : best - 1];
  const double right = grid[std::min(best + 1, grid.size() - 1)];

  std::uintmax_t iterations = kMaxBrentIterations;
  const auto [x, fx] = boost::math::tools::brent_find_minima(
      [&](double g) { return gamma_objective(g, data, prior); }, left, right,
      brent_bits(options.tol), iterations);
  result.evaluations += static_cast<std::size_t>(iterations);
  result.converged = iterations < kMaxBrentIterations;

  double gamma = x;
  if (!(fx <= values[best])) gamma = grid[best];
  result.gamma_star = gamma;
  result.objective_value = gamma_objective(gamma, data, prior);
  ++result.evaluations;
  return result;
}

GammaFitResult fit_gamma(const PredictionTrace& trace, const Trajectory& trajectory,
                         const BetaParams& prior, const FitOptions& options) {
  const TracedTrajectory single{trace, trajectory};
  return fit_gamma(std::span(&single, 1), prior, options);
}

void write_gamma_table_csv(std::ostream& out, std::span<const GammaTableRow> rows) {
  out << "predictor,gamma_star,objective,evaluations,converged,identifiable\n";
  for (const auto& row : rows) {
    out << csv_field(row.predictor_id) << ','
        << (row.fit.gamma_star ? fmt::format("{:.4f}", *row.fit.gamma_star) : std::string())
        << ',' << fmt::format("{:.6g}", row.fit.objective_value) << ',' << row.fit.evaluations
        << ',' << (row.fit.converged ? "true" : "false") << ','
        << (row.fit.identifiable() ? "true" : "false") << '\n';
  }
}

void write_gamma_table_text(std::ostream& out, std::span<const GammaTableRow> rows) {
  std::size_t width = std::string_view("Predictor").size();
  for (const auto& row : rows) width = std::max(width, row.predictor_id.size());
  out << fmt::format("{:<{}}  {:>14}\n", "Predictor", width, "Best-Fit gamma");
  out << std::string(width + 16, '-') << '\n';
  for (const auto& row : rows) {
    const std::string value =
        row.fit.gamma_star ? fmt::format("{:.4f}", *row.fit.gamma_star) : "n/a";
    out << fmt::format("{:<{}}  {:>14}", row.predictor_id, width, value);
    if (!row.fit.identifiable()) out << "  (" << row.fit.note << ')';
    out << '\n';
  }
}

}  // namespace coinbayes
