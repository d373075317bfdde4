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
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "json.hpp"

#include "coinbayes/outcome.hpp"

namespace coinbayes {

/// A run of i.i.d. draws from one distribution.
struct SegmentSpec {
  std::size_t length;
  DiscreteDistribution theta;

  SegmentSpec(std::size_t length, DiscreteDistribution theta);
  /// Coin segment with P(heads) = p_heads.
  static SegmentSpec coin(std::size_t length, double p_heads);
};

/// Ordered segments; switchover points are the cumulative segment lengths.
class ChangepointSpec {
 public:
  explicit ChangepointSpec(std::vector<SegmentSpec> segments);

  /// N = K + M samples, the first K from Bernoulli(theta1), the rest from
  /// Bernoulli(theta2). Requires 1 <= K < N.
  static ChangepointSpec two_segment(std::size_t total, std::size_t switchover, double theta1,
                                     double theta2);

  const std::vector<SegmentSpec>& segments() const noexcept { return segments_; }
  std::size_t outcome_count() const noexcept { return segments_.front().theta.size(); }
  /// N.
  std::size_t total_length() const noexcept;
  /// Index where each segment after the first begins.
  std::vector<std::size_t> switchover_points() const;
  /// K; the start of the second segment (total length if there is only one).
  std::size_t switchover() const;
  /// Segment that generated position `step` (0-based).
  const SegmentSpec& segment_at(std::size_t step) const;

 private:
  std::vector<SegmentSpec> segments_;
};

/// The 100-step coin process: 50 flips at theta = 0.75, then 50 at 0.25.
ChangepointSpec default_changepoint();

struct Trajectory {
  std::vector<std::size_t> outcomes;
  ChangepointSpec spec;
  std::uint64_t seed;
};

/// Draws each position i.i.d. from its segment's distribution. The result
/// depends only on (spec, seed).
Trajectory sample_trajectory(const ChangepointSpec& spec, const OutcomeSpace& space,
                             std::uint64_t seed);

/// Per-outcome counts over positions [start, end).
std::vector<std::uint64_t> empirical_counts(const Trajectory& trajectory, std::size_t start,
                                            std::size_t end);

/// One outcome label per line.
void write_trajectory_lines(std::ostream& out, const Trajectory& trajectory,
                            const OutcomeSpace& space);
std::vector<std::size_t> read_outcome_lines(std::istream& in, const OutcomeSpace& space);

nlohmann::json changepoint_to_json(const ChangepointSpec& spec);
ChangepointSpec changepoint_from_json(const nlohmann::json& j);
nlohmann::json trajectory_to_json(const Trajectory& trajectory, const OutcomeSpace& space);

}  // namespace coinbayes
