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

#ifndef CPSMC_SMC_HPP
#define CPSMC_SMC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/models/segment_model.hpp>
#include <cpsmc/models/shot_noise_cox.hpp>
#include <cpsmc/particles.hpp>
#include <cpsmc/random.hpp>
#include <cpsmc/rjmcmc.hpp>
#include <cpsmc/summary.hpp>

namespace cpsmc {

/// Where the conditioning data of the next window starts.
enum class TStarRule {
  /// Weighted mean of each particle's last changepoint, 0 for particles without one.
  kPosteriorMean,
  /// Always the previous update time (condition on the new data only).
  kPreviousUpdate,
};

/// Density of the displaced window level kept alongside a merged non-conjugate particle.
enum class AuxiliaryDensity {
  /// The window level's full conditional with its upper truncation dropped; a normalised
  /// density on (0, inf) determined by the merged particle alone.
  kUntruncatedConditional,
  /// The truncated full conditional the window sampler drew the level from.
  kProposalConditional,
};

struct SmcSettings {
  std::size_t particles = 1000;
  double ess_threshold = 1.0 / 3.0;  // resample when ESS < ess_threshold * particle count
  RjmcmcSettings window;
  bool move_after_resample = true;
  std::size_t move_sweeps = 1;
  TStarRule t_star_rule = TStarRule::kPosteriorMean;
  AuxiliaryDensity auxiliary = AuxiliaryDensity::kUntruncatedConditional;
  bool permute = true;
  bool track_lineage = true;

  void validate() const {
    window.validate();
    if (particles == 0) throw std::invalid_argument("particle count must be positive");
    if (!(ess_threshold >= 0.0 && ess_threshold <= 1.0)) {
      throw std::invalid_argument("ESS threshold must be a fraction in [0, 1]");
    }
  }
};

/// Proposal interval (t_prev, t_now] and the conditioning data (t_star, t_now].
struct UpdateWindow {
  double t_prev = 0.0;
  double t_now = 0.0;
  double t_star = 0.0;
  EventWindow data;

  UpdateWindow() = default;
  UpdateWindow(const EventStream& events, double prev, double now, double star)
      : t_prev{prev}, t_now{now}, t_star{star}, data{events, star, now} {
    if (!(star <= prev && prev < now)) throw std::invalid_argument("update window needs t_star <= t_prev < t_now");
  }

  [[nodiscard]] Frame frame() const noexcept { return Frame{t_star, t_prev, t_now}; }
  [[nodiscard]] Region region() const noexcept { return Region{t_prev, t_now}; }
};

struct UpdateDiagnostics {
  std::size_t update = 0;
  double time = 0.0;
  double t_star = 0.0;
  double ess = 0.0;
  std::size_t particles = 0;
  std::size_t proposals = 0;
  bool resampled = false;
  std::size_t unique_pre = 0;
  std::size_t unique_post = 0;
  double log_normalizer_increment = 0.0;
  std::uint64_t evaluations = 0;
  std::vector<std::size_t> window_k_counts;  // histogram of changepoints per window proposal
  double window_location_entropy = 0.0;      // see location_entropy
  double log_weight_variance = 0.0;          // over finite incremental log weights
  double k_mean = 0.0;
};

struct SmcState {
  WeightedParticleSet set;
  double time = 0.0;
  double log_normalizer = 0.0;
  std::vector<UpdateDiagnostics> history;
  std::vector<LineageRecord> lineage;
  std::vector<double> last_pre_resampling_log_weights;

  [[nodiscard]] std::size_t updates() const noexcept { return history.size(); }
};

/// Weighted mean of the last changepoint of each particle (0 when a particle has none).
inline double compute_t_star(const WeightedParticleSet& set) {
  if (set.empty()) throw std::invalid_argument("cannot estimate t* from an empty set");
  const auto w = set.scaled_weights();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!(w[i] > 0.0)) continue;
    num += w[i] * set.particles[i].last_changepoint(0.0);
    den += w[i];
  }
  return num / den;
}

/// Appends window changepoints to a particle (models without explicit levels).
inline ChangepointConfiguration concatenate(const ChangepointConfiguration& old,
                                            const ChangepointConfiguration& window) {
  ChangepointConfiguration out;
  out.taus.reserve(old.k() + window.k());
  out.taus = old.taus;
  out.taus.insert(out.taus.end(), window.taus.begin(), window.taus.end());
  return out;
}

/// Uniformly random permutation of 0, ..., n-1.
inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

/// Pairs old particle i with window particle permutation[i].
inline std::vector<ChangepointConfiguration> combine_conjugate(std::span<const ChangepointConfiguration> old,
                                                               std::span<const ChangepointConfiguration> window,
                                                               std::span<const std::size_t> permutation) {
  if (old.size() != window.size() || old.size() != permutation.size()) {
    throw std::invalid_argument("old, window and permutation sizes differ");
  }
  std::vector<ChangepointConfiguration> out;
  out.reserve(old.size());
  for (std::size_t i = 0; i < old.size(); ++i) out.push_back(concatenate(old[i], window[permutation[i]]));
  return out;
}

/// Non-conjugate version of combine_conjugate; each result keeps the displaced window level.
inline std::vector<MergeResult> combine_nonconjugate(std::span<const ChangepointConfiguration> old,
                                                     std::span<const ChangepointConfiguration> window,
                                                     std::span<const std::size_t> permutation,
                                                     const ShotNoiseCoxModel& model, double t_prev) {
  if (old.size() != window.size() || old.size() != permutation.size()) {
    throw std::invalid_argument("old, window and permutation sizes differ");
  }
  std::vector<MergeResult> out;
  out.reserve(old.size());
  for (std::size_t i = 0; i < old.size(); ++i) out.push_back(model.merge(old[i], window[permutation[i]], t_prev));
  return out;
}

/// Combined particle and its incremental log weight.
struct WeightedCombination {
  ChangepointConfiguration combined;
  double log_weight = kNegInf;
  double auxiliary = kNaN;
};

namespace detail {

template <SegmentModel Model>
double frame_terms(const Model& model, const EventStream& events, const ChangepointConfiguration& c,
                   const Frame& frame, std::size_t first, std::uint64_t& evaluations) {
  double total = 0.0;
  for (std::size_t i = first; i <= c.k(); ++i) {
    ++evaluations;
    const Segment s = segment_at(c, frame, i);
    const double prior = model.segment_log_prior(s);
    if (!(prior > kNegInf)) return kNegInf;
    const double t = prior + model.segment_log_marginal(s, events);
    if (std::isnan(t) || !(t > kNegInf)) return kNegInf;
    total += t;
  }
  return total;
}

}  // namespace detail

/// Combines an old particle on [0, t_prev] with a window proposal and returns the
/// incremental log weight
///   log gamma_[0,t_now](combined) - log gamma_[0,t_prev](old) - log gamma_window(proposal)
///   [+ log density of the displaced window level - log |J|].
/// Changepoint-rate factors cancel and so do all old segments except the last, so only the
/// segments from the old last changepoint onwards are evaluated.
template <SegmentModel Model>
WeightedCombination combine_weighted(const Model& model, const EventStream& events, const ChangepointConfiguration& old,
                                     const ChangepointConfiguration& proposal, const UpdateWindow& window,
                                     AuxiliaryDensity auxiliary = AuxiliaryDensity::kUntruncatedConditional,
                                     std::uint64_t* evaluations = nullptr) {
  std::uint64_t evals = 0;
  WeightedCombination out;
  double log_aux = 0.0;
  double log_jacobian = 0.0;
  if constexpr (Model::has_levels) {
    MergeResult merged;
    if constexpr (requires { model.merge(old, proposal, window.t_prev); }) {
      merged = model.merge(old, proposal, window.t_prev);
    } else {
      merged = model.base.merge(old, proposal, window.t_prev);
    }
    out.combined = std::move(merged.combined);
    out.auxiliary = merged.auxiliary;
    log_jacobian = merged.log_jacobian;
    const Segment s0 = segment_at(proposal, window.frame(), 0);
    TruncatedGamma tg = model.level_conditional(s0, proposal.k() ? proposal.levels[1] : kNaN, events);
    if (auxiliary == AuxiliaryDensity::kUntruncatedConditional) tg.upper = kInf;
    log_aux = tg.log_pdf(out.auxiliary);
  } else {
    out.combined = concatenate(old, proposal);
  }
  const double num = detail::frame_terms(model, events, out.combined, Frame::whole(window.t_now), old.k(), evals);
  if (num > kNegInf && log_aux > kNegInf) {
    const double old_term = detail::frame_terms(model, events, old, Frame::whole(window.t_prev), old.k(), evals);
    const double win = detail::frame_terms(model, events, proposal, window.frame(), 0, evals);
    const double lw = num - old_term - win + log_aux - log_jacobian;
    out.log_weight = std::isnan(lw) ? kNegInf : lw;
  }
  if (evaluations) *evaluations += evals;
  return out;
}

/// Incremental log weight only; see combine_weighted.
template <SegmentModel Model>
double incremental_log_weight(const Model& model, const EventStream& events, const ChangepointConfiguration& old,
                              const ChangepointConfiguration& proposal, const UpdateWindow& window,
                              AuxiliaryDensity auxiliary = AuxiliaryDensity::kUntruncatedConditional) {
  return combine_weighted(model, events, old, proposal, window, auxiliary).log_weight;
}

/// Start of the conditioning window for the next update.
inline double next_t_star(const SmcState& state, TStarRule rule) {
  if (rule == TStarRule::kPreviousUpdate) return state.time;
  return std::min(compute_t_star(state.set), state.time);
}

namespace detail {

inline double finite_variance(std::span<const double> xs) {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  for (double x : xs) {
    if (!std::isfinite(x)) continue;
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  return n > 1.0 ? m2 / (n - 1.0) : 0.0;
}

inline std::vector<std::uint32_t> to_u32(std::span<const std::size_t> xs) {
  std::vector<std::uint32_t> out(xs.size());
  std::transform(xs.begin(), xs.end(), out.begin(), [](std::size_t x) { return static_cast<std::uint32_t>(x); });
  return out;
}

inline std::vector<std::size_t> k_histogram(std::span<const ChangepointConfiguration> proposals) {
  std::vector<std::size_t> h;
  for (const auto& c : proposals) {
    if (c.k() >= h.size()) h.resize(c.k() + 1, 0);
    ++h[c.k()];
  }
  return h;
}

}  // namespace detail

/// Entropy of the binned changepoint locations of window proposals given their changepoint
/// count, averaged over the counts. Together with the entropy of the count histogram this is
/// the entropy of the proposals discretised into `bins` cells of the window.
inline double location_entropy(std::span<const ChangepointConfiguration> proposals, Region window,
                               std::size_t bins = 10) {
  if (proposals.empty()) return 0.0;
  std::map<std::vector<std::uint32_t>, std::size_t> cells;
  std::vector<std::size_t> per_k;
  for (const auto& c : proposals) {
    std::vector<std::uint32_t> key{static_cast<std::uint32_t>(c.k())};
    for (double t : c.taus) {
      const double x = (t - window.lo) / window.length() * static_cast<double>(bins);
      key.push_back(static_cast<std::uint32_t>(std::clamp(x, 0.0, static_cast<double>(bins - 1))));
    }
    ++cells[key];
    if (c.k() >= per_k.size()) per_k.resize(c.k() + 1, 0);
    ++per_k[c.k()];
  }
  const auto n = static_cast<double>(proposals.size());
  double h = 0.0;
  for (const auto& [key, count] : cells) {
    const double p_cell_given_k = static_cast<double>(count) / static_cast<double>(per_k[key[0]]);
    h -= static_cast<double>(count) / n * std::log(p_cell_given_k);
  }
  return std::max(0.0, h);
}

/// Advances the particle approximation from state.time to t_now.
///
/// Draws `proposals` window configurations (the configured particle count when 0) by
/// RJMCMC, equalises the two sets (replicating old particles or cycling proposals),
/// randomly pairs them, reweights, and resamples to the proposal count when the ESS falls
/// below the threshold, optionally followed by RJMCMC moves of changepoints after t*.
template <SegmentModel Model>
void smc_update(SmcState& state, const Model& model, const EventStream& events, double t_now,
                const SmcSettings& settings, Rng& rng, std::size_t proposals = 0) {
  settings.validate();
  if (!(t_now > state.time)) throw std::invalid_argument("update times must increase");
  const std::size_t m = proposals > 0 ? proposals : settings.particles;
  UpdateDiagnostics diag;
  diag.update = state.updates() + 1;
  diag.time = t_now;
  diag.proposals = m;
  LineageRecord record;

  std::vector<double> increments;
  if (state.updates() == 0) {
    const UpdateWindow window{events, 0.0, t_now, 0.0};
    auto draws = sample_window_posterior(model, window.region(), window.data, settings.window, m, rng, &diag.evaluations);
    diag.window_k_counts = detail::k_histogram(draws);
    diag.window_location_entropy = location_entropy(draws, window.region());
    state.set = WeightedParticleSet{};
    state.set.particles = std::move(draws);
    state.set.log_weights.assign(m, 0.0);
    increments.assign(m, 0.0);
    diag.t_star = 0.0;
  } else {
    const double t_star = next_t_star(state, settings.t_star_rule);
    const UpdateWindow window{events, state.time, t_now, t_star};
    diag.t_star = t_star;
    auto draws = sample_window_posterior(model, window.region(), window.data, settings.window, m, rng, &diag.evaluations);
    diag.window_k_counts = detail::k_histogram(draws);
    diag.window_location_entropy = location_entropy(draws, window.region());

    std::vector<std::size_t> parent(state.set.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    if (m > state.set.size()) {
      state.set = replicate_to(state.set, m, &parent);
    } else if (state.set.size() > m) {
      draws = pad_new_particles(draws, state.set.size());
    }
    const std::size_t n = state.set.size();
    std::vector<std::size_t> perm(n);
    if (settings.permute) {
      perm = random_permutation(n, rng);
    } else {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
    }

    const double before = log_sum_exp(state.set.log_weights);
    increments.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto wc = combine_weighted(model, events, state.set.particles[i], draws[perm[i]], window, settings.auxiliary,
                                 &diag.evaluations);
      state.set.particles[i] = std::move(wc.combined);
      increments[i] = wc.log_weight;
      state.set.log_weights[i] += wc.log_weight;
    }
    diag.log_normalizer_increment = log_sum_exp(state.set.log_weights) - before;
    if (settings.track_lineage) record.parent = detail::to_u32(parent);
  }
  state.time = t_now;
  state.log_normalizer += diag.log_normalizer_increment;
  diag.log_weight_variance = detail::finite_variance(increments);
  diag.ess = ess_from_log(state.set.log_weights);
  diag.particles = state.set.size();
  diag.k_mean = posterior_mean_k(state.set);

  const auto unique = deduplicate(state.set.particles);
  diag.unique_pre = unique.size();
  diag.unique_post = unique.size();
  if (settings.track_lineage) {
    record.group = detail::to_u32(unique.group_of);
    state.last_pre_resampling_log_weights = state.set.log_weights;
  }

  if (diag.ess < settings.ess_threshold * static_cast<double>(state.set.size())) {
    std::vector<std::size_t> ancestors;
    state.set = systematic_resample(state.set, m, rng, &ancestors);
    diag.resampled = true;
    diag.unique_post = count_unique(state.set.particles);
    if (settings.track_lineage) record.resampled = detail::to_u32(ancestors);
    if (settings.move_after_resample && settings.move_sweeps > 0) {
      const double lo = diag.t_star;
      RjmcmcKernel<Model> kernel{model, events, Frame::whole(t_now), Region{lo, t_now}, settings.window};
      for (auto& c : state.set.particles) kernel.run(c, settings.move_sweeps, rng);
      diag.evaluations += kernel.evaluations();
    }
  }
  if (settings.track_lineage) state.lineage.push_back(std::move(record));
  state.history.push_back(std::move(diag));
}

/// Per-update output of run_smc.
struct SmcTrace {
  std::vector<double> times;
  std::vector<IntensitySummary> intensity;
  std::vector<double> k_mean;
};

/// Runs smc_update over a grid of update times, summarising the intensity after each one.
/// `summary_rng` drives only the intensity quantile draws.
template <SegmentModel Model>
SmcTrace run_smc(SmcState& state, const Model& model, const EventStream& events, std::span<const double> update_times,
                 const SmcSettings& settings, Rng& rng, Rng& summary_rng) {
  SmcTrace trace;
  for (double t : update_times) {
    smc_update(state, model, events, t, settings, rng);
    trace.times.push_back(t);
    trace.intensity.push_back(summarize_intensity(model, events, state.set, t, summary_rng));
    trace.k_mean.push_back(state.history.back().k_mean);
  }
  return trace;
}

}  // namespace cpsmc

#endif
