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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coinbayes/oracle.hpp"
#include "coinbayes/outcome.hpp"

namespace coinbayes {

/// Total variation distance: half the L1 distance between p and q.
double tvd(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// Beta CDF of the true posterior at a model's point estimate. Values near 0
/// or 1 mark estimates in the posterior's tails.
double cdf_extremity(double point_estimate, const BetaParams& true_posterior);

struct CorrelationResult {
  double r;
  double p_value;
  std::size_t n;
};

/// Sample Pearson correlation with a two-sided p-value from the t statistic
/// r * sqrt((n - 2) / (1 - r^2)). Requires n >= 3 and non-zero variance in both
/// inputs (ZeroVarianceError otherwise).
CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------
// TVD aggregation

struct TvdKey {
  std::string predictor;
  double bias = 0.0;
  std::size_t icl_count = 0;
  std::optional<std::size_t> prompt;

  auto operator<=>(const TvdKey&) const = default;
};

struct TvdRecord {
  TvdKey key;
  double value;
};

struct TvdSummary {
  TvdKey key;
  double mean;
  /// Population standard deviation.
  double std;
  std::size_t count;
};

/// Mean and population standard deviation of each group, ordered by key.
/// With `by_prompt` false the prompt is dropped from the grouping key.
std::vector<TvdSummary> aggregate_tvd(std::span<const TvdRecord> records, bool by_prompt = false);

// ---------------------------------------------------------------------------
// Attention analysis

struct AttentionRecord {
  std::string trial_id;
  std::size_t switchover;  // K
  double attention_seg1;
  double attention_seg2;
  double point_estimate;
};

/// An attention record with the Bayesian ground truth of its trajectory.
struct AttentionObservation {
  AttentionRecord record;
  /// Samples after the switchover, N - K.
  std::size_t post_switch;
  BetaParams true_posterior;
};

/// Parses the attention CSV (header trial_id,K,attn_seg1,attn_seg2,point_estimate).
/// Rows that fail to parse are reported with their line number and skipped.
struct AttentionCsv {
  std::vector<AttentionRecord> records;
  std::vector<std::string> errors;
};
AttentionCsv read_attention_csv(std::istream& in);

struct FractionRow {
  std::string trial_id;
  std::size_t switchover;
  std::size_t post_switch;
  double fraction_seg1;
  double fraction_seg2;
  double extremity;
  double posterior_mean;
  /// point estimate minus the true posterior mean
  double deviation;
};

/// Coefficients of c0 + c1 x + c2 x^2 fitted by least squares.
struct QuadraticFit {
  std::size_t post_switch;
  std::array<double, 3> coefficients;
  std::size_t n;
};

struct AttentionAnalysis {
  /// Attention mass on each segment against cdf extremity.
  std::optional<CorrelationResult> seg1;
  std::optional<CorrelationResult> seg2;
  std::vector<FractionRow> fractions;
  /// Fraction of attention on segment 2 against the true posterior mean, one
  /// fit per value of N - K.
  std::vector<QuadraticFit> fits;
  /// Skipped groups and degenerate statistics.
  std::vector<std::string> report;
};

/// Requires at least three observations.
AttentionAnalysis attention_analysis(std::span<const AttentionObservation> observations);

/// Least-squares quadratic via the normal equations; nullopt when fewer than
/// three distinct x values or the system is ill-conditioned.
std::optional<std::array<double, 3>> fit_quadratic(std::span<const double> xs,
                                                   std::span<const double> ys);

}  // namespace coinbayes
