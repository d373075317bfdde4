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
#include <random>
#include <string_view>

namespace coinbayes {

/// Identifier written into every run record. Bump the version suffix whenever
/// the stream derivation or the uniform/categorical mapping changes.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64-substreams/v1";

/// SplitMix64 finalizer; a bijective 64-bit mix.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the substream for `trial` under `root`. Depends only on the two
/// inputs, so trials can be generated in any order or in parallel.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t trial) noexcept;

/// Thin wrapper over std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniform doubles are taken from the top 53 bits rather than from
/// std::uniform_real_distribution, whose algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();

 private:
  std::mt19937_64 engine_;
};

}  // namespace coinbayes
