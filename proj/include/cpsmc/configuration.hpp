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

#ifndef CPSMC_CONFIGURATION_HPP
#define CPSMC_CONFIGURATION_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <cpsmc/errors.hpp>

namespace cpsmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One particle: ordered changepoint times and, for non-conjugate models, one level per segment.
///
/// Segment i runs from taus[i-1] (or the frame origin) to taus[i] (or the frame horizon).
/// `levels` is empty when segment parameters are marginalised out.
struct ChangepointConfiguration {
  std::vector<double> taus;
  std::vector<double> levels;

  [[nodiscard]] std::size_t k() const noexcept { return taus.size(); }
  [[nodiscard]] std::size_t segments() const noexcept { return taus.size() + 1; }
  [[nodiscard]] bool has_levels() const noexcept { return !levels.empty(); }

  /// Time of the most recent changepoint, or `fallback` when there is none.
  [[nodiscard]] double last_changepoint(double fallback = 0.0) const noexcept {
    return taus.empty() ? fallback : taus.back();
  }
};

/// Bit-level equality: duplicates only ever arise by copying, so exact comparison is sound.
inline bool identical(const ChangepointConfiguration& a, const ChangepointConfiguration& b) noexcept {
  auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() &&
           std::equal(x.begin(), x.end(), y.begin(), [](double p, double q) {
             return std::bit_cast<std::uint64_t>(p) == std::bit_cast<std::uint64_t>(q);
           });
  };
  return same(a.taus, b.taus) && same(a.levels, b.levels);
}

struct ConfigurationHash {
  std::size_t operator()(const ChangepointConfiguration& c) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ c.taus.size();
    auto mix = [&h](double v) {
      h ^= std::bit_cast<std::uint64_t>(v);
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    };
    for (double t : c.taus) mix(t);
    mix(0.5);
    for (double l : c.levels) mix(l);
    return static_cast<std::size_t>(h);
  }
};

struct ConfigurationEqual {
  bool operator()(const ChangepointConfiguration& a, const ChangepointConfiguration& b) const noexcept {
    return identical(a, b);
  }
};

/// Where a configuration lives in time.
///
/// Segment 0 starts at `origin`; its level (if any) is referenced at `anchor`. The last
/// segment ends at `horizon`. A particle on [0, t] uses {0, 0, t}; a window proposal for
/// (t_prev, t] conditioned on data since t* uses {t*, t_prev, t}.
struct Frame {
  double origin = 0.0;
  double anchor = 0.0;
  double horizon = 0.0;

  static constexpr Frame whole(double t) noexcept { return Frame{0.0, 0.0, t}; }
};

/// Open interval in which changepoints may be placed or moved.
struct Region {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double length() const noexcept { return hi - lo; }
  [[nodiscard]] bool contains(double t) const noexcept { return t > lo && t < hi; }
};

/// Everything a segment model needs to score one segment.
struct Segment {
  double start = 0.0;   // exclusive
  double end = 0.0;     // inclusive
  double anchor = 0.0;  // time at which `level` applies
  double level = kNaN;
  bool first = true;
  double prev_level = kNaN;
  double prev_anchor = kNaN;

  [[nodiscard]] double duration() const noexcept { return end - start; }
};

inline Segment segment_at(const ChangepointConfiguration& c, const Frame& frame, std::size_t i) {
  Segment s;
  s.first = (i == 0);
  s.start = s.first ? frame.origin : c.taus[i - 1];
  s.end = (i < c.k()) ? c.taus[i] : frame.horizon;
  s.anchor = s.first ? frame.anchor : s.start;
  if (c.has_levels()) {
    s.level = c.levels[i];
    if (!s.first) {
      s.prev_level = c.levels[i - 1];
      s.prev_anchor = (i == 1) ? frame.anchor : c.taus[i - 2];
    }
  }
  return s;
}

/// Index of the segment whose interval (start, end] contains t.
inline std::size_t segment_index_at(const ChangepointConfiguration& c, double t) {
  return static_cast<std::size_t>(std::lower_bound(c.taus.begin(), c.taus.end(), t) - c.taus.begin());
}

/// True when taus are strictly increasing inside (lo, hi) and the level count matches.
inline bool is_valid(const ChangepointConfiguration& c, double lo, double hi) noexcept {
  for (std::size_t i = 0; i < c.k(); ++i) {
    if (!(c.taus[i] > lo && c.taus[i] < hi)) return false;
    if (i > 0 && !(c.taus[i] > c.taus[i - 1])) return false;
  }
  return c.levels.empty() || c.levels.size() == c.k() + 1;
}

inline void require_valid(const ChangepointConfiguration& c, double lo, double hi) {
  if (!is_valid(c, lo, hi)) {
    throw InvalidConfigurationError("changepoints must be strictly increasing inside the interval");
  }
}

}  // namespace cpsmc

#endif
