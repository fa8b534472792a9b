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

#ifndef CPSMC_MULTISTREAM_HPP
#define CPSMC_MULTISTREAM_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include <cpsmc/events.hpp>
#include <cpsmc/models/segment_model.hpp>
#include <cpsmc/particles.hpp>
#include <cpsmc/random.hpp>
#include <cpsmc/rjmcmc.hpp>
#include <cpsmc/smc.hpp>

namespace cpsmc {

/// Global per-update particle budget shared by several streams.
struct StreamBudget {
  std::size_t total = 0;
  std::size_t floor = 0;
  std::vector<std::size_t> allocations;

  void validate(std::size_t streams) const {
    if (streams == 0) throw std::invalid_argument("budget needs at least one stream");
    if (floor * streams > total) throw std::invalid_argument("budget cannot cover the per-stream floor");
    if (total == 0) throw std::invalid_argument("budget must be positive");
  }
};

/// Floors first, then the remainder in proportion to the scores with largest-remainder
/// rounding (ties to the lowest index). All-zero scores split the remainder evenly.
inline std::vector<std::size_t> allocate(std::span<const double> scores, const StreamBudget& budget) {
  const std::size_t n = scores.size();
  budget.validate(n);
  for (double s : scores) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("scores must be finite and nonnegative");
  }
  std::vector<std::size_t> out(n, budget.floor);
  const std::size_t remainder = budget.total - budget.floor * n;
  double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
  std::vector<double> share(n);
  for (std::size_t i = 0; i < n; ++i) {
    share[i] = sum > 0.0 ? static_cast<double>(remainder) * scores[i] / sum
                         : static_cast<double>(remainder) / static_cast<double>(n);
  }
  std::size_t given = 0;
  std::vector<double> frac(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto whole = static_cast<std::size_t>(std::floor(share[i]));
    out[i] += whole;
    given += whole;
    frac[i] = share[i] - static_cast<double>(whole);
  }
  // Floating-point shares can overshoot by a unit; take it back from the smallest fractions.
  while (given > remainder) {
    std::size_t j = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (out[i] > budget.floor && (j == n || frac[i] < frac[j])) j = i;
    }
    --out[j];
    --given;
    frac[j] += 1.0;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; given < remainder; ++r) {
    ++out[order[r % n]];
    ++given;
  }
  return out;
}

/// Window complexity: entropy (natural log) of the histogram of window changepoint counts,
/// plus the entropy of their binned locations given the count, plus the variance of the
/// incremental log weights.
inline double complexity_score(std::span<const std::size_t> k_counts, double log_weight_variance,
                               double location_entropy = 0.0) {
  double total = 0.0;
  for (auto c : k_counts) total += static_cast<double>(c);
  double entropy = 0.0;
  if (total > 0.0) {
    for (auto c : k_counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / total;
      entropy -= p * std::log(p);
    }
  }
  return std::max(0.0, entropy) + std::max(0.0, location_entropy) + std::max(0.0, log_weight_variance);
}

inline double complexity_score(const UpdateDiagnostics& d) {
  return complexity_score(d.window_k_counts, d.log_weight_variance, d.window_location_entropy);
}

/// When each stream's score is measured.
enum class ScoreTiming {
  /// A pilot batch of `floor` window proposals for the coming update, drawn from a separate
  /// random stream so the main update is unaffected.
  kPilot,
  /// Diagnostics of the stream's previous update.
  kPreviousUpdate,
};

using Allocator = std::function<std::vector<std::size_t>(std::span<const double>, const StreamBudget&)>;

struct MultiStreamSettings {
  SmcSettings smc;
  StreamBudget budget;
  ScoreTiming timing = ScoreTiming::kPilot;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::uint64_t seed = 1;
  Allocator allocator = [](std::span<const double> s, const StreamBudget& b) { return allocate(s, b); };
};

struct AllocationRecord {
  std::size_t update = 0;
  std::size_t stream = 0;
  double score = 0.0;
  std::size_t allocation = 0;
  double ess = 0.0;
  bool resampled = false;
};

struct MultiStreamResult {
  std::vector<SmcState> states;
  std::vector<AllocationRecord> allocations;
};

namespace detail {

/// Runs f(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& f) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock{error_mutex};
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Pilot score for the coming update: `count` window proposals paired with old particles.
template <SegmentModel Model>
double pilot_score(const SmcState& state, const Model& model, const EventStream& events, double t_now,
                   const SmcSettings& settings, std::size_t count, Rng& rng) {
  if (count == 0) return 0.0;
  if (state.updates() == 0) {
    const UpdateWindow window{events, 0.0, t_now, 0.0};
    const auto draws = sample_window_posterior(model, window.region(), window.data, settings.window, count, rng);
    return complexity_score(k_histogram(draws), 0.0, location_entropy(draws, window.region()));
  }
  const double t_star = next_t_star(state, settings.t_star_rule);
  const UpdateWindow window{events, state.time, t_now, t_star};
  const auto draws = sample_window_posterior(model, window.region(), window.data, settings.window, count, rng);
  std::vector<double> increments(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& old = state.set.particles[i % state.set.size()];
    increments[i] = combine_weighted(model, events, old, draws[i], window, settings.auxiliary).log_weight;
  }
  return complexity_score(k_histogram(draws), finite_variance(increments), location_entropy(draws, window.region()));
}

}  // namespace detail

/// Runs independent SMC filters on several streams with a shared particle budget.
///
/// At each update every stream is scored, the budget is allocated, and each stream draws
/// its allocated number of window proposals. Streams run in parallel between updates and
/// each owns random streams derived from (seed, stream index), so results do not depend on
/// scheduling. With a single stream this is exactly smc_update with the whole budget.
template <SegmentModel Model>
MultiStreamResult run_parallel(std::span<const EventStream> streams, std::span<const Model> models,
                               std::span<const double> update_times, const MultiStreamSettings& settings) {
  const std::size_t n = streams.size();
  if (models.size() != n && models.size() != 1) throw std::invalid_argument("need one model or one per stream");
  settings.budget.validate(n);
  settings.smc.validate();
  auto model_of = [&](std::size_t j) -> const Model& { return models.size() == 1 ? models[0] : models[j]; };

  MultiStreamResult result;
  result.states.resize(n);
  std::vector<Rng> main_rng;
  std::vector<Rng> pilot_rng;
  for (std::size_t j = 0; j < n; ++j) {
    main_rng.push_back(make_stream_rng(settings.seed, j, 0));
    pilot_rng.push_back(make_stream_rng(settings.seed, j, 1));
  }
  std::vector<double> scores(n, 0.0);
  for (std::size_t u = 0; u < update_times.size(); ++u) {
    const double t = update_times[u];
    if (settings.timing == ScoreTiming::kPilot) {
      detail::parallel_for(n, settings.threads, [&](std::size_t j) {
        scores[j] = detail::pilot_score(result.states[j], model_of(j), streams[j], t, settings.smc,
                                        settings.budget.floor, pilot_rng[j]);
      });
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        const auto& h = result.states[j].history;
        scores[j] = h.empty() ? 1.0 : complexity_score(h.back());
      }
    }
    const auto alloc = settings.allocator(scores, settings.budget);
    if (alloc.size() != n || std::accumulate(alloc.begin(), alloc.end(), std::size_t{0}) != settings.budget.total) {
      throw std::logic_error("allocator broke the budget");
    }
    detail::parallel_for(n, settings.threads, [&](std::size_t j) {
      smc_update(result.states[j], model_of(j), streams[j], t, settings.smc, main_rng[j], std::max<std::size_t>(1, alloc[j]));
    });
    for (std::size_t j = 0; j < n; ++j) {
      const auto& d = result.states[j].history.back();
      result.allocations.push_back({u + 1, j, scores[j], alloc[j], d.ess, d.resampled});
    }
  }
  return result;
}

}  // namespace cpsmc

#endif
