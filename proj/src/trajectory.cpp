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

#include "coinbayes/trajectory.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "coinbayes/error.hpp"
#include "coinbayes/rng.hpp"

namespace coinbayes {

SegmentSpec::SegmentSpec(std::size_t length, DiscreteDistribution theta)
    : length(length), theta(std::move(theta)) {
  if (length == 0) throw InvalidArgument("segment length must be at least 1");
}

SegmentSpec SegmentSpec::coin(std::size_t length, double p_heads) {
  return SegmentSpec(length, DiscreteDistribution::bernoulli(p_heads));
}

ChangepointSpec::ChangepointSpec(std::vector<SegmentSpec> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw InvalidArgument("changepoint spec needs at least one segment");
  const std::size_t dim = segments_.front().theta.size();
  for (const auto& s : segments_) {
    if (s.theta.size() != dim) {
      throw InvalidArgument("all segments must share one outcome space");
    }
  }
}

ChangepointSpec ChangepointSpec::two_segment(std::size_t total, std::size_t switchover,
                                             double theta1, double theta2) {
  if (switchover == 0 || switchover >= total) {
    throw InvalidArgument("switchover K must satisfy 1 <= K < N");
  }
  return ChangepointSpec(
      {SegmentSpec::coin(switchover, theta1), SegmentSpec::coin(total - switchover, theta2)});
}

std::size_t ChangepointSpec::total_length() const noexcept {
  std::size_t n = 0;
  for (const auto& s : segments_) n += s.length;
  return n;
}

std::vector<std::size_t> ChangepointSpec::switchover_points() const {
  std::vector<std::size_t> points;
  std::size_t offset = 0;
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    offset += segments_[i].length;
    points.push_back(offset);
  }
  return points;
}

std::size_t ChangepointSpec::switchover() const {
  return segments_.size() > 1 ? segments_.front().length : total_length();
}

const SegmentSpec& ChangepointSpec::segment_at(std::size_t step) const {
  std::size_t offset = 0;
  for (const auto& s : segments_) {
    offset += s.length;
    if (step < offset) return s;
  }
  throw InvalidArgument("step " + std::to_string(step) + " is past the end of the spec");
}

ChangepointSpec default_changepoint() { return ChangepointSpec::two_segment(100, 50, 0.75, 0.25); }

Trajectory sample_trajectory(const ChangepointSpec& spec, const OutcomeSpace& space,
                             std::uint64_t seed) {
  if (spec.outcome_count() != space.size()) {
    throw InvalidArgument("changepoint spec and outcome space differ in size");
  }
  Rng rng(seed);
  std::vector<std::size_t> outcomes;
  outcomes.reserve(spec.total_length());
  for (const auto& segment : spec.segments()) {
    const auto probs = segment.theta.probabilities();
    for (std::size_t i = 0; i < segment.length; ++i) {
      const double u = rng.uniform();
      double cumulative = 0.0;
      std::size_t pick = probs.size() - 1;
      for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
        cumulative += probs[j];
        if (u < cumulative) {
          pick = j;
          break;
        }
      }
      // a zero-mass last outcome must never be drawn through rounding slack
      while (probs[pick] == 0.0 && pick > 0) --pick;
      outcomes.push_back(pick);
    }
  }
  return {std::move(outcomes), spec, seed};
}

std::vector<std::uint64_t> empirical_counts(const Trajectory& trajectory, std::size_t start,
                                            std::size_t end) {
  if (start > end || end > trajectory.outcomes.size()) {
    throw InvalidArgument("range [" + std::to_string(start) + ", " + std::to_string(end) +
                          ") outside trajectory of length " +
                          std::to_string(trajectory.outcomes.size()));
  }
  std::vector<std::uint64_t> counts(trajectory.spec.outcome_count(), 0);
  for (std::size_t i = start; i < end; ++i) ++counts.at(trajectory.outcomes[i]);
  return counts;
}

void write_trajectory_lines(std::ostream& out, const Trajectory& trajectory,
                            const OutcomeSpace& space) {
  for (std::size_t o : trajectory.outcomes) out << space.label(o) << '\n';
}

std::vector<std::size_t> read_outcome_lines(std::istream& in, const OutcomeSpace& space) {
  std::vector<std::size_t> outcomes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto idx = space.index_of(line);
    if (!idx) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": unknown outcome '" + line +
                            "'");
    }
    outcomes.push_back(*idx);
  }
  return outcomes;
}

nlohmann::json changepoint_to_json(const ChangepointSpec& spec) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& s : spec.segments()) {
    nlohmann::json seg{{"length", s.length}};
    if (s.theta.size() == 2) {
      seg["theta"] = s.theta[0];
    } else {
      seg["theta"] = std::vector<double>(s.theta.probabilities().begin(),
                                         s.theta.probabilities().end());
    }
    segments.push_back(std::move(seg));
  }
  return {{"segments", std::move(segments)}};
}

ChangepointSpec changepoint_from_json(const nlohmann::json& j) {
  std::vector<SegmentSpec> segments;
  for (const auto& seg : j.at("segments")) {
    const auto length = seg.at("length").get<std::size_t>();
    const auto& theta = seg.at("theta");
    if (theta.is_number()) {
      segments.push_back(SegmentSpec::coin(length, theta.get<double>()));
    } else {
      segments.emplace_back(length, DiscreteDistribution(theta.get<std::vector<double>>()));
    }
  }
  return ChangepointSpec(std::move(segments));
}

nlohmann::json trajectory_to_json(const Trajectory& trajectory, const OutcomeSpace& space) {
  nlohmann::json outcomes = nlohmann::json::array();
  for (std::size_t o : trajectory.outcomes) outcomes.push_back(space.label(o));
  return {{"seed", trajectory.seed},
          {"rng", kRngAlgorithm},
          {"spec", changepoint_to_json(trajectory.spec)},
          {"outcomes", std::move(outcomes)}};
}

}  // namespace coinbayes
