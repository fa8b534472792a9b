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

#ifndef CPSMC_SUMMARY_HPP
#define CPSMC_SUMMARY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/models/chained_gamma.hpp>
#include <cpsmc/models/segment_model.hpp>
#include <cpsmc/particles.hpp>
#include <cpsmc/random.hpp>

namespace cpsmc {

/// Smallest value whose normalised cumulative weight reaches p.
inline double weighted_quantile(std::vector<std::pair<double, double>> value_weight, double p) {
  if (value_weight.empty()) throw std::invalid_argument("no values to summarise");
  std::sort(value_weight.begin(), value_weight.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (const auto& [v, w] : value_weight) total += w;
  if (!(total > 0.0)) throw DegenerateWeightsError();
  double cumulative = 0.0;
  for (const auto& [v, w] : value_weight) {
    cumulative += w / total;
    if (cumulative >= p) return v;
  }
  return value_weight.back().first;
}

struct IntensitySummary {
  double mean = kNaN;
  double q05 = kNaN;
  double q95 = kNaN;
};

/// Posterior summary of the intensity at time t for particles laid out on [0, t].
///
/// The mean averages each particle's conditional mean of the current rate; the quantiles use
/// one intensity draw per particle.
template <SegmentModel Model>
IntensitySummary summarize_intensity(const Model& model, const EventStream& events, const WeightedParticleSet& set,
                                     double t, Rng& rng) {
  const auto w = set.normalized_weights();
  const Frame frame = Frame::whole(t);
  IntensitySummary out;
  out.mean = 0.0;
  std::vector<std::pair<double, double>> draws;
  draws.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& c = set.particles[i];
    const Segment s = segment_at(c, frame, c.k());
    if (w[i] > 0.0) out.mean += w[i] * model.intensity_mean(s, events);
    draws.emplace_back(model.sample_intensity(s, events, rng), w[i]);
  }
  out.q05 = weighted_quantile(draws, 0.05);
  out.q95 = weighted_quantile(std::move(draws), 0.95);
  return out;
}

/// Intensity summary after reweighting conjugate particles towards a chained-gamma prior.
///
/// Every segment intensity is drawn from its conjugate posterior; the weights then pick up
/// the ratio of the chained prior to the independent gamma prior at those draws.
inline IntensitySummary summarize_intensity_chained(const EventStream& events, const WeightedParticleSet& set,
                                                    double t, double alpha, double beta,
                                                    const ChainedGammaPrior& chain, Rng& rng) {
  const Frame frame = Frame::whole(t);
  std::vector<double> log_w(set.size());
  std::vector<double> current(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto c = with_sampled_intensities(set.particles[i], frame, events, alpha, beta, rng);
    log_w[i] = set.log_weights[i] > kNegInf ? chained_gamma_reweight(c, set.log_weights[i], alpha, beta, chain)
                                            : kNegInf;
    current[i] = c.levels.back();
  }
  const double m = max_log_weight(log_w);
  std::vector<std::pair<double, double>> draws(set.size());
  double total = 0.0;
  IntensitySummary out;
  out.mean = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double w = std::exp(log_w[i] - m);
    draws[i] = {current[i], w};
    total += w;
    out.mean += w * current[i];
  }
  out.mean /= total;
  out.q05 = weighted_quantile(draws, 0.05);
  out.q95 = weighted_quantile(std::move(draws), 0.95);
  return out;
}

/// Posterior mean number of changepoints.
inline double posterior_mean_k(const WeightedParticleSet& set) {
  const auto w = set.normalized_weights();
  double k = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) k += w[i] * static_cast<double>(set.particles[i].k());
  return k;
}

/// Genealogy of one update, used to count surviving distinct particles afterwards.
///
/// `parent[i]` maps pre-resampling particle i to its index in the previous update's final
/// population; `group[i]` labels its distinct value. `resampled[j]`, empty when no
/// resampling happened, maps final particle j back to its pre-resampling ancestor.
struct LineageRecord {
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> group;
  std::vector<std::uint32_t> resampled;
};

struct UniqueCount {
  std::size_t update = 0;
  std::size_t pre_resampling = 0;
  std::size_t post_resampling = 0;
};

namespace detail {

inline std::vector<std::size_t> trace_distinct(std::span<const LineageRecord> lineage, std::vector<std::uint32_t> pre) {
  std::vector<std::size_t> counts(lineage.size(), 0);
  for (std::size_t n = lineage.size(); n-- > 0;) {
    const auto& rec = lineage[n];
    std::unordered_set<std::uint32_t> groups;
    for (auto i : pre) groups.insert(rec.group[i]);
    counts[n] = groups.size();
    if (n == 0) break;
    std::unordered_set<std::uint32_t> parents;
    for (auto i : pre) parents.insert(rec.parent[i]);
    const auto& prev = lineage[n - 1];
    std::unordered_set<std::uint32_t> next;
    for (auto p : parents) next.insert(prev.resampled.empty() ? p : prev.resampled[p]);
    pre.assign(next.begin(), next.end());
    std::sort(pre.begin(), pre.end());
  }
  return counts;
}

}  // namespace detail

/// Number of distinct particles at each update that have descendants in the final population.
///
/// The pre-resampling curve follows every positively weighted particle of the last update
/// before its resampling step; the post-resampling curve follows only the particles that
/// survive a resampling of that population (the engine's own one if it resampled, otherwise
/// a systematic resample drawn with `rng`).
inline std::vector<UniqueCount> unique_particle_curve(std::span<const LineageRecord> lineage,
                                                      std::span<const double> final_pre_log_weights, Rng& rng) {
  if (lineage.empty()) return {};
  const auto& last = lineage.back();
  if (final_pre_log_weights.size() != last.group.size()) {
    throw std::invalid_argument("final weights do not match the lineage record");
  }
  std::vector<std::uint32_t> pre;
  for (std::uint32_t i = 0; i < final_pre_log_weights.size(); ++i) {
    if (final_pre_log_weights[i] > kNegInf) pre.push_back(i);
  }
  std::vector<std::uint32_t> post;
  if (!last.resampled.empty()) {
    post = last.resampled;
  } else {
    const double m = max_log_weight(final_pre_log_weights);
    std::vector<double> w(final_pre_log_weights.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(final_pre_log_weights[i] - m);
    const double u = uniform01(rng) / static_cast<double>(w.size());
    for (auto i : systematic_indices(w, w.size(), u)) post.push_back(static_cast<std::uint32_t>(i));
  }
  std::sort(post.begin(), post.end());
  post.erase(std::unique(post.begin(), post.end()), post.end());

  const auto a = detail::trace_distinct(lineage, std::move(pre));
  const auto b = detail::trace_distinct(lineage, std::move(post));
  std::vector<UniqueCount> out(lineage.size());
  for (std::size_t n = 0; n < lineage.size(); ++n) out[n] = {n + 1, a[n], b[n]};
  return out;
}

}  // namespace cpsmc

#endif
