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

#include "coinbayes/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "coinbayes/error.hpp"
#include "coinbayes/special_functions.hpp"

namespace coinbayes {
namespace {

constexpr double kMaxConditionNumber = 1e12;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const char* column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw InvalidArgument(fmt::format("column {}: '{}' is not a number", column, s));
  }
  return v;
}

}  // namespace

double tvd(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size()) {
    throw InvalidArgument(
        fmt::format("TVD between spaces of size {} and {}", p.size(), q.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

double cdf_extremity(double point_estimate, const BetaParams& true_posterior) {
  return posterior_cdf(true_posterior, point_estimate);
}

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("pearson inputs differ in length");
  const std::size_t n = xs.size();
  if (n < 3) throw InvalidArgument(fmt::format("pearson needs n >= 3, got {}", n));
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0) throw ZeroVarianceError("pearson: first input has zero variance");
  if (syy == 0.0) throw ZeroVarianceError("pearson: second input has zero variance");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  const double one_minus_r2 = 1.0 - r * r;
  const double t = one_minus_r2 <= 0.0 ? std::copysign(INFINITY, r)
                                       : r * std::sqrt(dof / one_minus_r2);
  return {r, student_t_two_sided_p(t, dof), n};
}

std::vector<TvdSummary> aggregate_tvd(std::span<const TvdRecord> records, bool by_prompt) {
  std::map<TvdKey, std::vector<double>> groups;
  for (const auto& rec : records) {
    TvdKey key = rec.key;
    if (!by_prompt) key.prompt.reset();
    groups[key].push_back(rec.value);
  }
  std::vector<TvdSummary> out;
  out.reserve(groups.size());
  for (const auto& [key, values] : groups) {
    // Shifted by the first value so a constant group has exactly that mean.
    const double shift = values.front();
    const double n = static_cast<double>(values.size());
    double offset = 0.0;
    for (double v : values) offset += v - shift;
    const double mean = shift + offset / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    out.push_back({key, mean, std::sqrt(ss / n), values.size()});
  }
  return out;
}

AttentionCsv read_attention_csv(std::istream& in) {
  AttentionCsv result;
  std::string line;
  if (!std::getline(in, line)) {
    result.errors.push_back("line 1: missing header");
    return result;
  }
  const std::vector<std::string> expected{"trial_id", "K", "attn_seg1", "attn_seg2",
                                          "point_estimate"};
  if (split_csv_line(line) != expected) {
    result.errors.push_back("line 1: header must be trial_id,K,attn_seg1,attn_seg2,point_estimate");
    return result;
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    try {
      if (fields.size() != expected.size()) {
        throw InvalidArgument(fmt::format("expected 5 fields, found {}", fields.size()));
      }
      AttentionRecord rec;
      rec.trial_id = fields[0];
      const double k = parse_double(fields[1], "K");
      if (k < 0 || k != std::floor(k)) throw InvalidArgument("K must be a non-negative integer");
      rec.switchover = static_cast<std::size_t>(k);
      rec.attention_seg1 = parse_double(fields[2], "attn_seg1");
      rec.attention_seg2 = parse_double(fields[3], "attn_seg2");
      rec.point_estimate = parse_double(fields[4], "point_estimate");
      if (rec.attention_seg1 < 0 || rec.attention_seg2 < 0) {
        throw InvalidArgument("attention mass must be non-negative");
      }
      if (!(rec.point_estimate >= 0 && rec.point_estimate <= 1)) {
        throw InvalidArgument("point_estimate must lie in [0, 1]");
      }
      result.records.push_back(std::move(rec));
    } catch (const InvalidArgument& e) {
      result.errors.push_back(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return result;
}

std::optional<std::array<double, 3>> fit_quadratic(std::span<const double> xs,
                                                   std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("quadratic fit inputs differ in length");
  std::vector<double> distinct(xs.begin(), xs.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) return std::nullopt;

  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Eigen::Vector3d row(1.0, xs[i], xs[i] * xs[i]);
    normal += row * row.transpose();
    rhs += row * ys[i];
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(normal);
  const auto& sv = svd.singularValues();
  if (sv(2) <= 0.0 || sv(0) / sv(2) > kMaxConditionNumber) return std::nullopt;
  const Eigen::Vector3d c = normal.ldlt().solve(rhs);
  return std::array<double, 3>{c(0), c(1), c(2)};
}

AttentionAnalysis attention_analysis(std::span<const AttentionObservation> observations) {
  if (observations.size() < 3) {
    throw InvalidArgument(
        fmt::format("attention analysis needs at least 3 records, got {}", observations.size()));
  }
  AttentionAnalysis out;
  std::vector<double> seg1, seg2, ext_all, ext_post;
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_m;

  for (const auto& obs : observations) {
    const auto& rec = obs.record;
    const double extremity = cdf_extremity(rec.point_estimate, obs.true_posterior);
    const double mean = posterior_mean(obs.true_posterior);
    seg1.push_back(rec.attention_seg1);
    ext_all.push_back(extremity);
    if (obs.post_switch > 0) {
      seg2.push_back(rec.attention_seg2);
      ext_post.push_back(extremity);
    }
    const double total = rec.attention_seg1 + rec.attention_seg2;
    if (total <= 0.0) {
      out.report.push_back("trial " + rec.trial_id + ": zero total attention, no fraction");
      continue;
    }
    FractionRow row{rec.trial_id,
                    rec.switchover,
                    obs.post_switch,
                    rec.attention_seg1 / total,
                    rec.attention_seg2 / total,
                    extremity,
                    mean,
                    rec.point_estimate - mean};
    if (obs.post_switch > 0) {
      by_m[obs.post_switch].first.push_back(mean);
      by_m[obs.post_switch].second.push_back(row.fraction_seg2);
    } else {
      by_m.try_emplace(0);
    }
    out.fractions.push_back(std::move(row));
  }

  auto correlate = [&](const char* name, std::span<const double> xs, std::span<const double> ys,
                       std::optional<CorrelationResult>& slot) {
    try {
      slot = pearson(xs, ys);
    } catch (const ZeroVarianceError& e) {
      out.report.push_back(fmt::format("{}: {}", name, e.what()));
    } catch (const InvalidArgument& e) {
      out.report.push_back(fmt::format("{}: {}", name, e.what()));
    }
  };
  correlate("segment 1", seg1, ext_all, out.seg1);
  if (seg2.size() < observations.size()) {
    out.report.push_back(fmt::format("segment 2: {} records with no samples after the switchover excluded",
                                     observations.size() - seg2.size()));
  }
  correlate("segment 2", seg2, ext_post, out.seg2);

  for (const auto& [m, xy] : by_m) {
    if (m == 0) {
      out.report.push_back("M=0: no samples after the switchover, fit skipped");
      continue;
    }
    auto coeffs = fit_quadratic(xy.first, xy.second);
    if (!coeffs) {
      out.report.push_back(fmt::format("M={}: degenerate data, fit skipped", m));
      continue;
    }
    out.fits.push_back({m, *coeffs, xy.first.size()});
  }
  return out;
}

}  // namespace coinbayes
