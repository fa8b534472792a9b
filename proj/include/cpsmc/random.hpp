// Copyright 2026 The cpsmc Authors.
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

#ifndef CPSMC_RANDOM_HPP
#define CPSMC_RANDOM_HPP

#include <cstdint>
#include <random>

namespace cpsmc {

using Rng = std::mt19937_64;

/// Derives an independent generator for (stream, purpose) from a master seed.
///
/// Per-stream results depend only on the master seed and the stream index, never on
/// scheduling order, so parallel runs stay reproducible.
inline Rng make_stream_rng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t purpose = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return Rng{seq};
}

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>{0.0, 1.0}(rng); }

/// Uniform draw on [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Gamma variate parameterised by shape and rate.
inline double sample_gamma(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>{shape, 1.0 / rate}(rng);
}

inline double sample_exponential(Rng& rng, double rate) { return std::exponential_distribution<double>{rate}(rng); }

}  // namespace cpsmc

#endif
