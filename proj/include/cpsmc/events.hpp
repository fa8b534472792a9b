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

#ifndef CPSMC_EVENTS_HPP
#define CPSMC_EVENTS_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cpsmc {

/// Immutable, sorted record of event times for one stream.
///
/// Counts and time sums over any half-open interval (a, b] are answered by binary search
/// against prefix sums, so segment statistics cost O(log n) regardless of how long the
/// stream has been running.
class EventStream {
 public:
  EventStream() : prefix_(1, 0.0) {}

  explicit EventStream(std::vector<double> times) : times_{std::move(times)} {
    std::sort(times_.begin(), times_.end());
    prefix_.resize(times_.size() + 1);
    prefix_[0] = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
      prefix_[i + 1] = prefix_[i] + times_[i];
    }
  }

  [[nodiscard]] std::span<const double> times() const noexcept { return times_; }
  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
  [[nodiscard]] bool empty() const noexcept { return times_.empty(); }

  /// Index of the first event strictly greater than t.
  [[nodiscard]] std::size_t rank(double t) const {
    return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  }

  /// Number of events in (a, b].
  [[nodiscard]] std::size_t count(double a, double b) const {
    if (b <= a) {
      return 0;
    }
    return rank(b) - rank(a);
  }

  /// Sum of event times in (a, b].
  [[nodiscard]] double time_sum(double a, double b) const {
    if (b <= a) {
      return 0.0;
    }
    return prefix_[rank(b)] - prefix_[rank(a)];
  }

  /// Events in (a, b].
  [[nodiscard]] std::span<const double> between(double a, double b) const {
    if (b <= a) {
      return {};
    }
    const auto lo = rank(a);
    const auto hi = rank(b);
    return std::span<const double>{times_}.subspan(lo, hi - lo);
  }

 private:
  std::vector<double> times_;
  std::vector<double> prefix_;
};

/// Non-owning view of the events of a stream that fall in (lower, upper].
struct EventWindow {
  const EventStream* stream = nullptr;
  double lower = 0.0;
  double upper = 0.0;

  EventWindow() = default;
  EventWindow(const EventStream& s, double a, double b) : stream{&s}, lower{a}, upper{b} {
    if (b < a) {
      throw std::invalid_argument("event window upper bound precedes lower bound");
    }
  }

  [[nodiscard]] std::span<const double> events() const { return stream->between(lower, upper); }
  [[nodiscard]] std::size_t count() const { return stream->count(lower, upper); }
  [[nodiscard]] double length() const { return upper - lower; }
};

}  // namespace cpsmc

#endif
