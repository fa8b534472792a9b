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

#ifndef CPSMC_MODELS_SHOT_NOISE_COX_HPP
#define CPSMC_MODELS_SHOT_NOISE_COX_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/random.hpp>
#include <cpsmc/truncated_gamma.hpp>

namespace cpsmc {

/// How window intensities are shifted when a window proposal is appended to a particle.
enum class MergeShift {
  /// Every shot size is kept, so level j moves by delta * exp(-kappa (tau_j - tau_1)).
  kShotPreserving,
  /// Every window level moves by the same delta; later shots may turn negative.
  kConstant,
};

/// Output of appending a window proposal to a particle.
struct MergeResult {
  ChangepointConfiguration combined;
  double auxiliary = kNaN;  // the displaced window level, kept for the extended target
  double log_jacobian = 0.0;
};

/// Shot-noise Cox process: the intensity jumps up at each changepoint (a shot) and decays at
/// rate kappa in between. `levels[i]` is the intensity immediately after shot i.
struct ShotNoiseCoxModel {
  static constexpr bool has_levels = true;

  double nu = 1.0;
  double kappa = 1.0;
  double alpha = 1.0;
  MergeShift merge_shift = MergeShift::kShotPreserving;

  ShotNoiseCoxModel() = default;
  ShotNoiseCoxModel(double nu_, double kappa_, double alpha_, MergeShift shift = MergeShift::kShotPreserving)
      : nu{nu_}, kappa{kappa_}, alpha{alpha_}, merge_shift{shift} {
    if (!(nu > 0.0 && kappa > 0.0 && alpha > 0.0)) {
      throw std::invalid_argument("shot-noise Cox parameters must be positive");
    }
  }

  [[nodiscard]] double changepoint_rate() const noexcept { return nu; }

  [[nodiscard]] double decay(double dt) const noexcept { return std::exp(-kappa * dt); }

  /// Intensity just before the shot that opens segment s.
  [[nodiscard]] double pre_shot_level(const Segment& s) const noexcept {
    return s.first ? 0.0 : s.prev_level * decay(s.start - s.prev_anchor);
  }

  /// Exponential prior on the first level and on each shot size; -inf if a shot is not positive.
  [[nodiscard]] double segment_log_prior(const Segment& s) const noexcept {
    if (s.first) return std::log(alpha) - alpha * s.level;
    const double shot = s.level - pre_shot_level(s);
    if (!(shot > 0.0)) return kNegInf;
    return std::log(alpha) - alpha * shot;
  }

  /// Integrated intensity of segment s.
  [[nodiscard]] double compensator(const Segment& s) const noexcept {
    return s.level * (decay(s.start - s.anchor) - decay(s.end - s.anchor)) / kappa;
  }

  /// Sum of log intensity at the events of s minus the compensator.
  [[nodiscard]] double segment_log_marginal(const Segment& s, const EventStream& events) const {
    const auto r = static_cast<double>(events.count(s.start, s.end));
    const double sum = events.time_sum(s.start, s.end);
    const double log_events = r > 0.0 ? r * std::log(s.level) - kappa * (sum - r * s.anchor) : 0.0;
    return log_events - compensator(s);
  }

  /// Full conditional of the level of segment s given its neighbours.
  ///
  /// Proportional to level^r exp(-rate * level) on (pre-shot level, exp(kappa (end - anchor)) * next level);
  /// the upper bound is infinite for the last segment. `next_level` is NaN when s is last.
  [[nodiscard]] TruncatedGamma level_conditional(const Segment& s, double next_level, const EventStream& events,
                                                 bool with_data = true) const {
    const bool has_next = !std::isnan(next_level);
    const double end_decay = decay(s.end - s.anchor);
    TruncatedGamma tg;
    tg.shape = 1.0 + (with_data ? static_cast<double>(events.count(s.start, s.end)) : 0.0);
    tg.rate = alpha * (has_next ? (1.0 - end_decay) : 1.0);
    if (with_data) tg.rate += (decay(s.start - s.anchor) - end_decay) / kappa;
    tg.lower = pre_shot_level(s);
    tg.upper = has_next ? next_level / end_decay : kInf;
    return tg;
  }

  [[nodiscard]] double intensity_mean(const Segment& s, const EventStream&) const noexcept {
    return s.level * decay(s.end - s.anchor);
  }

  double sample_intensity(const Segment& s, const EventStream& events, Rng&) const noexcept {
    return intensity_mean(s, events);
  }

  /// Intensity jump needed so the last old level and window level 0 describe the same process
  /// at the first window shot.
  [[nodiscard]] double merge_delta(double old_level, double old_anchor, double window_level0, double first_shot,
                                   double t_prev) const noexcept {
    return old_level * decay(first_shot - old_anchor) - window_level0 * decay(first_shot - t_prev);
  }

  /// Appends a window proposal (levels referenced at t_prev for segment 0) to a particle on
  /// [0, t_prev]. The old last level carries over unchanged and window level 0 becomes the
  /// auxiliary variable; the map is unit-triangular, so the Jacobian is 1.
  [[nodiscard]] MergeResult merge(const ChangepointConfiguration& old, const ChangepointConfiguration& window,
                                  double t_prev) const {
    MergeResult out;
    out.combined.taus.reserve(old.k() + window.k());
    out.combined.taus = old.taus;
    out.combined.taus.insert(out.combined.taus.end(), window.taus.begin(), window.taus.end());
    out.combined.levels.reserve(out.combined.taus.size() + 1);
    out.combined.levels = old.levels;
    out.auxiliary = window.levels.front();
    if (window.k() > 0) {
      const double first_shot = window.taus.front();
      const double delta = merge_delta(old.levels.back(), old.last_changepoint(0.0), out.auxiliary, first_shot, t_prev);
      for (std::size_t j = 1; j <= window.k(); ++j) {
        const double scale =
            merge_shift == MergeShift::kShotPreserving ? decay(window.taus[j - 1] - first_shot) : 1.0;
        out.combined.levels.push_back(window.levels[j] + delta * scale);
      }
    }
    return out;
  }
};

/// Log prior of the levels of a configuration whose first segment starts (and is anchored) at `origin`.
inline double sncp_prior_log_density(const ChangepointConfiguration& c, double kappa, double alpha,
                                     double origin = 0.0) {
  if (c.levels.size() != c.k() + 1) throw std::invalid_argument("one level per segment is required");
  const ShotNoiseCoxModel model{1.0, kappa, alpha};
  const Frame frame{origin, origin, c.k() ? c.taus.back() + 1.0 : origin + 1.0};
  double lp = 0.0;
  for (std::size_t i = 0; i <= c.k(); ++i) {
    lp += model.segment_log_prior(segment_at(c, frame, i));
    if (lp == kNegInf) return kNegInf;
  }
  return lp;
}

/// Log likelihood of the events in `window` given a configuration on (window.lower, window.upper].
///
/// Returns -inf when a shot is not positive.
inline double sncp_log_likelihood(const ChangepointConfiguration& c, const EventWindow& window, double kappa) {
  if (c.levels.size() != c.k() + 1) throw std::invalid_argument("one level per segment is required");
  require_valid(c, window.lower, window.upper);
  const ShotNoiseCoxModel model{1.0, kappa, 1.0};
  const Frame frame{window.lower, window.lower, window.upper};
  double ll = 0.0;
  for (std::size_t i = 0; i <= c.k(); ++i) {
    const Segment s = segment_at(c, frame, i);
    if (!(s.level > model.pre_shot_level(s))) return kNegInf;
    ll += model.segment_log_marginal(s, *window.stream);
  }
  return ll;
}

/// Gibbs draw of level i from its truncated-gamma full conditional.
inline double sncp_truncated_gamma_conditional(std::size_t i, const ChangepointConfiguration& c,
                                               const EventWindow& window, double kappa, double alpha, Rng& rng) {
  if (i > c.k()) throw std::out_of_range("segment index out of range");
  const ShotNoiseCoxModel model{1.0, kappa, alpha};
  const Frame frame{window.lower, window.lower, window.upper};
  const Segment s = segment_at(c, frame, i);
  const double next = i < c.k() ? c.levels[i + 1] : kNaN;
  const TruncatedGamma tg = model.level_conditional(s, next, *window.stream);
  if (tg.empty()) throw InvalidConfigurationError("empty truncation interval for level conditional");
  return tg.sample(rng);
}

}  // namespace cpsmc

#endif
