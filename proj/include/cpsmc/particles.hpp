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

#ifndef CPSMC_PARTICLES_HPP
#define CPSMC_PARTICLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <cpsmc/configuration.hpp>
#include <cpsmc/errors.hpp>
#include <cpsmc/random.hpp>

namespace cpsmc {

/// Particles with unnormalised importance weights held in log space.
struct WeightedParticleSet {
  std::vector<ChangepointConfiguration> particles;
  std::vector<double> log_weights;

  [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }
  [[nodiscard]] bool empty() const noexcept { return particles.empty(); }

  void push_back(ChangepointConfiguration c, double log_w = 0.0) {
    particles.push_back(std::move(c));
    log_weights.push_back(log_w);
  }

  /// Weights exp(log_w - max log_w); the largest is exactly 1.
  [[nodiscard]] std::vector<double> scaled_weights() const;
  /// Weights summing to one.
  [[nodiscard]] std::vector<double> normalized_weights() const;
};

/// Largest finite log weight; throws when no weight is positive.
inline double max_log_weight(std::span<const double> log_weights) {
  double m = kNegInf;
  for (double lw : log_weights) {
    if (lw > m) m = lw;
  }
  if (!(m > kNegInf) || std::isnan(m) || std::isinf(m)) {
    throw DegenerateWeightsError();
  }
  return m;
}

inline std::vector<double> WeightedParticleSet::scaled_weights() const {
  const double m = max_log_weight(log_weights);
  std::vector<double> w(log_weights.size());
  std::transform(log_weights.begin(), log_weights.end(), w.begin(), [m](double lw) { return std::exp(lw - m); });
  return w;
}

inline std::vector<double> WeightedParticleSet::normalized_weights() const {
  auto w = scaled_weights();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

/// log(sum(exp(log_weights))).
inline double log_sum_exp(std::span<const double> log_weights) {
  const double m = max_log_weight(log_weights);
  double s = 0.0;
  for (double lw : log_weights) s += std::exp(lw - m);
  return m + std::log(s);
}

/// Effective sample size (sum w)^2 / sum w^2.
inline double ess(std::span<const double> weights) {
  double s = 0.0;
  double s2 = 0.0;
  for (double w : weights) {
    if (w < 0.0 || std::isnan(w)) throw std::invalid_argument("weights must be nonnegative");
    s += w;
    s2 += w * w;
  }
  if (!(s > 0.0)) throw DegenerateWeightsError();
  return (s * s) / s2;
}

inline double ess_from_log(std::span<const double> log_weights) {
  const double m = max_log_weight(log_weights);
  double s = 0.0;
  double s2 = 0.0;
  for (double lw : log_weights) {
    const double w = std::exp(lw - m);
    s += w;
    s2 += w * w;
  }
  return (s * s) / s2;
}

/// Offspring counts for systematic resampling with a given offset u in [0, 1/count).
///
/// Grid points u + i/count are matched against the normalised cumulative weights.
inline std::vector<std::size_t> systematic_offspring(std::span<const double> weights, std::size_t count, double u) {
  if (count == 0) throw std::invalid_argument("resample count must be positive");
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw DegenerateWeightsError();

  std::vector<std::size_t> offspring(weights.size(), 0);
  const double step = 1.0 / static_cast<double>(count);
  double cumulative = 0.0;
  std::size_t j = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = i;
  }
  for (std::size_t i = 0; i < weights.size() && j < count; ++i) {
    cumulative += weights[i] / total;
    const double edge = (i == last_positive) ? 2.0 : cumulative;
    while (j < count && u + static_cast<double>(j) * step < edge) {
      ++offspring[i];
      ++j;
    }
  }
  return offspring;
}

/// Ancestor index for each of `count` resampled particles, in increasing order.
inline std::vector<std::size_t> systematic_indices(std::span<const double> weights, std::size_t count, double u) {
  const auto offspring = systematic_offspring(weights, count, u);
  std::vector<std::size_t> idx;
  idx.reserve(count);
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    idx.insert(idx.end(), offspring[i], i);
  }
  return idx;
}

/// Systematic resampling to `count` equally weighted particles.
inline WeightedParticleSet systematic_resample(const WeightedParticleSet& set, std::size_t count, Rng& rng,
                                               std::vector<std::size_t>* ancestors = nullptr) {
  if (count == 0) throw std::invalid_argument("resample count must be positive");
  const auto w = set.scaled_weights();
  const double u = uniform01(rng) / static_cast<double>(count);
  auto idx = systematic_indices(w, count, u);
  WeightedParticleSet out;
  out.particles.reserve(count);
  out.log_weights.assign(count, 0.0);
  for (std::size_t i : idx) out.particles.push_back(set.particles[i]);
  if (ancestors) *ancestors = std::move(idx);
  return out;
}

/// Deduplicated view of a flat particle list.
///
/// `first_index[g]` is the flat index of the first copy of unique particle g, `multiplicity[g]`
/// its number of copies, and `group_of[i]` the unique group of flat particle i. Groups are
/// ordered by first occurrence.
struct UniqueParticles {
  std::vector<std::size_t> first_index;
  std::vector<std::size_t> multiplicity;
  std::vector<std::size_t> group_of;

  [[nodiscard]] std::size_t size() const noexcept { return first_index.size(); }
};

inline UniqueParticles deduplicate(std::span<const ChangepointConfiguration> particles) {
  UniqueParticles u;
  u.group_of.resize(particles.size());
  std::unordered_map<ChangepointConfiguration, std::size_t, ConfigurationHash, ConfigurationEqual> seen;
  seen.reserve(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    auto [it, inserted] = seen.try_emplace(particles[i], u.first_index.size());
    if (inserted) {
      u.first_index.push_back(i);
      u.multiplicity.push_back(0);
    }
    u.group_of[i] = it->second;
    ++u.multiplicity[it->second];
  }
  return u;
}

inline std::size_t count_unique(std::span<const ChangepointConfiguration> particles) {
  return deduplicate(particles).size();
}

/// Replicate counts chosen greedily to shrink the sum of squared weights (the N -> M scheme).
///
/// `combined_weights[i]` is the total weight carried by unique particle i (its copy weight
/// times its current multiplicity `initial[i]`). At every step the particle with the largest
/// reduction delta_i = w_i^2 / ((m_i + 1) m_i) is replicated, in blocks sized so that it just
/// stops being the best candidate. Ties go to the lowest index.
inline std::vector<std::size_t> replication_counts(std::span<const double> combined_weights,
                                                   std::span<const std::size_t> initial, std::size_t target) {
  const std::size_t n_unique = combined_weights.size();
  if (initial.size() != n_unique) throw std::invalid_argument("weight and multiplicity sizes differ");
  std::vector<std::size_t> m(initial.begin(), initial.end());
  std::size_t total = std::accumulate(m.begin(), m.end(), std::size_t{0});
  if (target < total) throw std::invalid_argument("replication target is smaller than the particle count");
  if (n_unique == 0) throw std::invalid_argument("no particles to replicate");

  auto delta_of = [&](std::size_t i) {
    const double w = combined_weights[i];
    const double mi = static_cast<double>(m[i]);
    return (w * w) / ((mi + 1.0) * mi);
  };
  std::vector<double> delta(n_unique);
  for (std::size_t i = 0; i < n_unique; ++i) delta[i] = delta_of(i);

  auto argmax_excluding = [&](std::size_t skip) {
    std::size_t best = n_unique;
    for (std::size_t i = 0; i < n_unique; ++i) {
      if (i == skip) continue;
      if (best == n_unique || delta[i] > delta[best]) best = i;
    }
    return best;
  };

  std::size_t star = argmax_excluding(n_unique);
  while (total < target) {
    const std::size_t remaining = target - total;
    const std::size_t next = argmax_excluding(star);
    std::size_t x = remaining;
    if (next != n_unique && delta[next] > 0.0) {
      const double w = combined_weights[star];
      const double bound = std::sqrt((w * w) / delta[next] + 0.25) - 0.5 - static_cast<double>(m[star]);
      const double ceiled = std::ceil(bound);
      x = ceiled < 1.0 ? 1 : static_cast<std::size_t>(std::min(ceiled, static_cast<double>(remaining)));
      // Smallest x with w^2 / ((m + x + 1)(m + x)) < delta_next; guard against rounding in the closed form.
      auto still_best = [&](std::size_t xx) {
        const double mm = static_cast<double>(m[star] + xx);
        return (w * w) / ((mm + 1.0) * mm) >= delta[next];
      };
      while (x < remaining && still_best(x)) ++x;
      while (x > 1 && !still_best(x - 1)) --x;
      x = std::min(x, remaining);
    }
    m[star] += x;
    total += x;
    delta[star] = delta_of(star);
    if (next == n_unique) break;
    star = next;
  }
  return m;
}

/// Grows a weighted set to exactly `target` particles without changing any weighted estimate.
///
/// Each unique particle i with total weight W_i ends up with m_i copies of weight W_i / m_i.
/// `ancestors`, when given, receives the flat input index each output particle was copied from.
inline WeightedParticleSet replicate_to(const WeightedParticleSet& set, std::size_t target,
                                        std::vector<std::size_t>* ancestors = nullptr) {
  if (target < set.size()) throw std::invalid_argument("replicate_to cannot shrink a particle set");
  if (set.empty()) throw std::invalid_argument("replicate_to needs at least one particle");

  const double lmax = max_log_weight(set.log_weights);
  const auto unique = deduplicate(set.particles);
  std::vector<double> combined(unique.size(), 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    combined[unique.group_of[i]] += std::exp(set.log_weights[i] - lmax);
  }
  const auto m = replication_counts(combined, unique.multiplicity, target);

  WeightedParticleSet out;
  out.particles.reserve(target);
  out.log_weights.reserve(target);
  if (ancestors) {
    ancestors->clear();
    ancestors->reserve(target);
  }
  for (std::size_t g = 0; g < unique.size(); ++g) {
    const double lw = (combined[g] > 0.0) ? lmax + std::log(combined[g] / static_cast<double>(m[g])) : kNegInf;
    for (std::size_t c = 0; c < m[g]; ++c) {
      out.particles.push_back(set.particles[unique.first_index[g]]);
      out.log_weights.push_back(lw);
      if (ancestors) ancestors->push_back(unique.first_index[g]);
    }
  }
  return out;
}

/// Extends a list to `target` entries by cycling: element i is items[i mod n].
template <class T>
std::vector<T> pad_new_particles(std::span<const T> items, std::size_t target) {
  if (items.empty()) throw std::invalid_argument("cannot pad an empty particle list");
  if (target < items.size()) throw std::invalid_argument("padding target is smaller than the list");
  std::vector<T> out;
  out.reserve(target);
  for (std::size_t i = 0; i < target; ++i) out.push_back(items[i % items.size()]);
  return out;
}

template <class T>
std::vector<T> pad_new_particles(const std::vector<T>& items, std::size_t target) {
  return pad_new_particles(std::span<const T>{items}, target);
}

}  // namespace cpsmc

#endif
