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

#ifndef CPSMC_RJMCMC_HPP
#define CPSMC_RJMCMC_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/models/segment_model.hpp>
#include <cpsmc/random.hpp>
#include <cpsmc/truncated_gamma.hpp>

namespace cpsmc {

/// Mixture weights over the four move types. Height moves only exist for models with levels;
/// for other models the remaining three are renormalised.
struct MoveProbabilities {
  double birth = 0.35;
  double death = 0.35;
  double shift = 0.2;
  double height = 0.1;

  void validate() const {
    if (birth < 0.0 || death < 0.0 || shift < 0.0 || height < 0.0) {
      throw std::invalid_argument("move probabilities must be nonnegative");
    }
    if (std::abs(birth + death + shift + height - 1.0) > 1e-9) {
      throw std::invalid_argument("move probabilities must sum to one");
    }
  }

  [[nodiscard]] std::array<double, 4> effective(bool with_levels) const {
    std::array<double, 4> p{birth, death, shift, with_levels ? height : 0.0};
    const double total = p[0] + p[1] + p[2] + p[3];
    if (!(total > 0.0)) throw std::invalid_argument("no move has positive probability");
    for (double& x : p) x /= total;
    return p;
  }
};

/// Data-driven birth locations: bins over the move region, each with mass proportional to
/// its event count plus `smoothing`. A bin width of zero means a tenth of the region.
struct BirthProposal {
  double bin_width = 0.0;
  double smoothing = 1.0;
};

struct RjmcmcSettings {
  std::size_t iterations = 2000;
  std::size_t burn_in = 500;
  std::size_t thin = 0;  // 0: spread the requested draws evenly over the post burn-in sweeps
  MoveProbabilities moves;
  bool data_driven_birth = false;
  BirthProposal birth;

  void validate() const {
    moves.validate();
    if (iterations <= burn_in) throw std::invalid_argument("iterations must exceed burn-in");
    if (birth.bin_width < 0.0 || !(birth.smoothing > 0.0)) {
      throw std::invalid_argument("birth proposal needs bin_width >= 0 and smoothing > 0");
    }
  }

  /// Sweeps between retained draws when `count` draws are requested.
  [[nodiscard]] std::size_t thinning_for(std::size_t count) const {
    if (thin > 0) return thin;
    return std::max<std::size_t>(1, (iterations - burn_in) / std::max<std::size_t>(count, 1));
  }
};

/// Density on a region used to place new changepoints.
class BirthDensity {
 public:
  static BirthDensity uniform(Region region) {
    BirthDensity d;
    d.region_ = region;
    d.cumulative_ = {1.0};
    d.width_ = region.length();
    return d;
  }

  static BirthDensity data_driven(Region region, const EventStream& events, const BirthProposal& p) {
    const double width = p.bin_width > 0.0 ? p.bin_width : region.length() / 10.0;
    const auto bins = static_cast<std::size_t>(std::max(1.0, std::round(region.length() / width)));
    BirthDensity d;
    d.region_ = region;
    d.width_ = region.length() / static_cast<double>(bins);
    d.cumulative_.resize(bins);
    double total = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      const double a = region.lo + d.width_ * static_cast<double>(b);
      const double e = (b + 1 == bins) ? region.hi : a + d.width_;
      total += static_cast<double>(events.count(a, e)) + p.smoothing;
      d.cumulative_[b] = total;
    }
    for (double& c : d.cumulative_) c /= total;
    d.cumulative_.back() = 1.0;
    return d;
  }

  [[nodiscard]] const Region& region() const noexcept { return region_; }

  double sample(Rng& rng) const {
    for (;;) {
      const double u = uniform01(rng);
      const auto b = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                              cumulative_.begin());
      const std::size_t bin = std::min(b, cumulative_.size() - 1);
      const double a = region_.lo + width_ * static_cast<double>(bin);
      const double s = (bin + 1 == cumulative_.size()) ? cpsmc::uniform(rng, a, region_.hi) : cpsmc::uniform(rng, a, a + width_);
      if (region_.contains(s)) return s;
    }
  }

  [[nodiscard]] double log_density(double s) const {
    if (!region_.contains(s)) return kNegInf;
    const auto raw = static_cast<std::size_t>((s - region_.lo) / width_);
    const std::size_t bin = std::min(raw, cumulative_.size() - 1);
    const double mass = cumulative_[bin] - (bin > 0 ? cumulative_[bin - 1] : 0.0);
    const double a = region_.lo + width_ * static_cast<double>(bin);
    const double len = (bin + 1 == cumulative_.size()) ? region_.hi - a : width_;
    return std::log(mass / len);
  }

 private:
  Region region_{};
  double width_ = 1.0;
  std::vector<double> cumulative_;
};

enum class Move { kBirth, kDeath, kShift, kHeight };

/// Reversible-jump kernel over changepoints in `region`, targeting
///   nu^k exp(-nu |region|) * prod_i exp(segment_log_prior + segment_log_marginal)
/// for configurations laid out on `frame`. Changepoints outside the region are held fixed,
/// so the same kernel serves window proposals, full-history runs and local move steps.
///
/// Acceptance ratios only touch the segments next to the modified changepoint.
template <SegmentModel Model>
class RjmcmcKernel {
 public:
  RjmcmcKernel(const Model& model, const EventStream& events, Frame frame, Region region,
               const RjmcmcSettings& settings)
      : model_{&model},
        events_{&events},
        frame_{frame},
        region_{region},
        probs_{settings.moves.effective(Model::has_levels)},
        birth_{settings.data_driven_birth ? BirthDensity::data_driven(region, events, settings.birth)
                                          : BirthDensity::uniform(region)} {
    if (!(region.hi > region.lo)) throw std::invalid_argument("move region must have positive length");
    if (region.lo < frame.origin || region.hi > frame.horizon) {
      throw std::invalid_argument("move region must lie inside the frame");
    }
    log_nu_ = std::log(model.changepoint_rate());
  }

  [[nodiscard]] const Frame& frame() const noexcept { return frame_; }
  [[nodiscard]] const Region& region() const noexcept { return region_; }
  [[nodiscard]] const BirthDensity& birth_density() const noexcept { return birth_; }
  [[nodiscard]] std::uint64_t evaluations() const noexcept { return evaluations_; }

  /// Log of one segment's prior and likelihood contribution.
  [[nodiscard]] double segment_term(const ChangepointConfiguration& c, std::size_t i) const {
    ++evaluations_;
    const Segment s = segment_at(c, frame_, i);
    const double prior = model_->segment_log_prior(s);
    if (!(prior > kNegInf)) return kNegInf;
    const double lik = model_->segment_log_marginal(s, *events_);
    const double t = prior + lik;
    return std::isnan(t) ? kNegInf : t;
  }

  /// Sum of segment terms over indices [first, last], clipped to the configuration.
  [[nodiscard]] double segment_terms(const ChangepointConfiguration& c, std::size_t first, std::size_t last) const {
    double total = 0.0;
    for (std::size_t i = first; i <= std::min(last, c.k()); ++i) {
      total += segment_term(c, i);
      if (!(total > kNegInf)) return kNegInf;
    }
    return total;
  }

  /// Joint log density of the whole configuration (up to the fixed changepoints' constant).
  [[nodiscard]] double log_target(const ChangepointConfiguration& c) const {
    const double segs = segment_terms(c, 0, c.k());
    if (!(segs > kNegInf)) return kNegInf;
    return static_cast<double>(c.k()) * log_nu_ - model_->changepoint_rate() * (frame_.horizon - frame_.origin) + segs;
  }

  /// Changepoint indices [first, last) that lie inside the move region.
  [[nodiscard]] std::pair<std::size_t, std::size_t> movable(const ChangepointConfiguration& c) const {
    const auto first = static_cast<std::size_t>(std::upper_bound(c.taus.begin(), c.taus.end(), region_.lo) -
                                                c.taus.begin());
    const auto last = static_cast<std::size_t>(std::lower_bound(c.taus.begin(), c.taus.end(), region_.hi) -
                                               c.taus.begin());
    return {first, std::max(first, last)};
  }

  /// Starting state: no changepoints inside the region; levels drawn from their conditionals.
  [[nodiscard]] ChangepointConfiguration initial_state(Rng& rng) const {
    ChangepointConfiguration c;
    if constexpr (Model::has_levels) {
      c.levels.assign(1, 1.0);
      c.levels[0] = level_conditional(c, 0).sample(rng);
    }
    return c;
  }

  /// Full conditional of level i of c (its own current value is ignored).
  [[nodiscard]] TruncatedGamma level_conditional(const ChangepointConfiguration& c, std::size_t i) const
    requires Model::has_levels
  {
    const double next = i < c.k() ? c.levels[i + 1] : kNaN;
    return model_->level_conditional(segment_at(c, frame_, i), next, *events_);
  }

  /// Configuration with a changepoint inserted at s (and, with levels, `level` for the new segment).
  [[nodiscard]] static ChangepointConfiguration with_birth(const ChangepointConfiguration& c, double s,
                                                           double level) {
    const auto j = static_cast<std::size_t>(std::lower_bound(c.taus.begin(), c.taus.end(), s) - c.taus.begin());
    ChangepointConfiguration out = c;
    out.taus.insert(out.taus.begin() + static_cast<std::ptrdiff_t>(j), s);
    if (c.has_levels()) out.levels.insert(out.levels.begin() + static_cast<std::ptrdiff_t>(j + 1), level);
    return out;
  }

  [[nodiscard]] static ChangepointConfiguration with_death(const ChangepointConfiguration& c, std::size_t j) {
    ChangepointConfiguration out = c;
    out.taus.erase(out.taus.begin() + static_cast<std::ptrdiff_t>(j));
    if (c.has_levels()) out.levels.erase(out.levels.begin() + static_cast<std::ptrdiff_t>(j + 1));
    return out;
  }

  /// Log proposal density of the level given to a newborn segment i of `after`.
  [[nodiscard]] double birth_level_log_density(const ChangepointConfiguration& after, std::size_t i) const {
    if constexpr (Model::has_levels) {
      return level_conditional(after, i).log_pdf(after.levels[i]);
    } else {
      return 0.0;
    }
  }

  /// Log acceptance ratio (before truncation at 0) for inserting s with the given level.
  [[nodiscard]] double birth_log_ratio(const ChangepointConfiguration& c, double s, double level = kNaN) const {
    const ChangepointConfiguration next = with_birth(c, s, level);
    const auto j = static_cast<std::size_t>(std::lower_bound(c.taus.begin(), c.taus.end(), s) - c.taus.begin());
    return birth_log_ratio(c, next, j);
  }

  /// Log acceptance ratio for removing changepoint j.
  [[nodiscard]] double death_log_ratio(const ChangepointConfiguration& c, std::size_t j) const {
    return death_log_ratio(c, with_death(c, j), j);
  }

  /// Log acceptance ratio for moving changepoint j to s (symmetric proposal).
  [[nodiscard]] double shift_log_ratio(const ChangepointConfiguration& c, std::size_t j, double s) const {
    ChangepointConfiguration next = c;
    next.taus[j] = s;
    return segment_terms(next, j, j + 2) - segment_terms(c, j, j + 2);
  }

  /// One move attempt; `log_target` (if given) is kept equal to log_target(c).
  Move step(ChangepointConfiguration& c, Rng& rng, double* log_target = nullptr) {
    const double u = uniform01(rng);
    Move move = Move::kHeight;
    if (u < probs_[0]) {
      move = Move::kBirth;
    } else if (u < probs_[0] + probs_[1]) {
      move = Move::kDeath;
    } else if (u < probs_[0] + probs_[1] + probs_[2]) {
      move = Move::kShift;
    }
    switch (move) {
      case Move::kBirth:
        birth(c, rng, log_target);
        break;
      case Move::kDeath:
        death(c, rng, log_target);
        break;
      case Move::kShift:
        shift(c, rng, log_target);
        break;
      case Move::kHeight:
        if constexpr (Model::has_levels) height(c, rng, log_target);
        break;
    }
    return move;
  }

  void run(ChangepointConfiguration& c, std::size_t sweeps, Rng& rng, double* log_target = nullptr) {
    for (std::size_t s = 0; s < sweeps; ++s) step(c, rng, log_target);
  }

 private:
  [[nodiscard]] double birth_log_ratio(const ChangepointConfiguration& c, const ChangepointConfiguration& next,
                                       std::size_t j) const {
    const auto [first, last] = movable(c);
    const double reverse = std::log(probs_[1]) - std::log(static_cast<double>(last - first + 1));
    const double forward = std::log(probs_[0]) + birth_.log_density(next.taus[j]) + birth_level_log_density(next, j + 1);
    const double delta = segment_terms(next, j, j + 2) - segment_terms(c, j, j + 1);
    return delta + log_nu_ + reverse - forward;
  }

  [[nodiscard]] double death_log_ratio(const ChangepointConfiguration& c, const ChangepointConfiguration& next,
                                       std::size_t j) const {
    const auto [first, last] = movable(c);
    const double forward = std::log(probs_[1]) - std::log(static_cast<double>(last - first));
    const double reverse = std::log(probs_[0]) + birth_.log_density(c.taus[j]) + birth_level_log_density(c, j + 1);
    const double delta = segment_terms(next, j, j + 1) - segment_terms(c, j, j + 2);
    return delta - log_nu_ + reverse - forward;
  }

  static bool accept(double log_ratio, Rng& rng) {
    if (std::isnan(log_ratio)) return false;
    return log_ratio >= 0.0 || std::log(uniform01(rng)) < log_ratio;
  }

  void birth(ChangepointConfiguration& c, Rng& rng, double* log_target) {
    const double s = birth_.sample(rng);
    if (std::binary_search(c.taus.begin(), c.taus.end(), s)) return;
    const auto j = static_cast<std::size_t>(std::lower_bound(c.taus.begin(), c.taus.end(), s) - c.taus.begin());
    ChangepointConfiguration next = with_birth(c, s, 1.0);
    if constexpr (Model::has_levels) {
      const TruncatedGamma tg = level_conditional(next, j + 1);
      if (tg.empty()) return;
      next.levels[j + 1] = tg.sample(rng);
    }
    const double r = birth_log_ratio(c, next, j);
    if (accept(r, rng)) {
      if (log_target) *log_target += segment_terms(next, j, j + 2) - segment_terms(c, j, j + 1) + log_nu_;
      c = std::move(next);
    }
  }

  void death(ChangepointConfiguration& c, Rng& rng, double* log_target) {
    const auto [first, last] = movable(c);
    if (last == first) return;
    const std::size_t j = first + std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(last - first)),
                                           last - first - 1);
    ChangepointConfiguration next = with_death(c, j);
    const double r = death_log_ratio(c, next, j);
    if (accept(r, rng)) {
      if (log_target) *log_target += segment_terms(next, j, j + 1) - segment_terms(c, j, j + 2) - log_nu_;
      c = std::move(next);
    }
  }

  void shift(ChangepointConfiguration& c, Rng& rng, double* log_target) {
    const auto [first, last] = movable(c);
    if (last == first) return;
    const std::size_t j = first + std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(last - first)),
                                           last - first - 1);
    const double lo = std::max(region_.lo, j > 0 ? c.taus[j - 1] : region_.lo);
    const double hi = std::min(region_.hi, j + 1 < c.k() ? c.taus[j + 1] : region_.hi);
    const double s = uniform(rng, lo, hi);
    if (!(s > lo && s < hi)) return;
    ChangepointConfiguration next = c;
    next.taus[j] = s;
    const double r = segment_terms(next, j, j + 2) - segment_terms(c, j, j + 2);
    if (accept(r, rng)) {
      if (log_target) *log_target += r;
      c = std::move(next);
    }
  }

  void height(ChangepointConfiguration& c, Rng& rng, double* log_target)
    requires Model::has_levels
  {
    const std::size_t first = segment_index_at(c, region_.lo);
    const std::size_t n = c.k() + 1 - first;
    const std::size_t i = first + std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)), n - 1);
    const TruncatedGamma tg = level_conditional(c, i);
    if (tg.empty()) return;
    const double before = log_target ? segment_terms(c, i, i + 1) : 0.0;
    c.levels[i] = tg.sample(rng);
    if (log_target) *log_target += segment_terms(c, i, i + 1) - before;
  }

  const Model* model_;
  const EventStream* events_;
  Frame frame_;
  Region region_;
  std::array<double, 4> probs_;
  BirthDensity birth_;
  double log_nu_ = 0.0;
  mutable std::uint64_t evaluations_ = 0;
};

/// Draws `count` configurations from the posterior of changepoints on (region.lo, region.hi)
/// given the events of `data` (which may start earlier, at the conditioning time).
///
/// A single chain is run from an empty configuration; after burn-in every `thin`-th state is
/// kept. The chain is lengthened when more draws are requested than post burn-in sweeps exist.
/// `evaluations`, if given, is increased by the number of segment evaluations performed.
template <SegmentModel Model>
std::vector<ChangepointConfiguration> sample_window_posterior(const Model& model, Region region,
                                                              const EventWindow& data, const RjmcmcSettings& settings,
                                                              std::size_t count, Rng& rng,
                                                              std::uint64_t* evaluations = nullptr) {
  settings.validate();
  if (!(region.hi > region.lo)) throw std::invalid_argument("window must have positive length");
  if (data.lower > region.lo || data.upper != region.hi) {
    throw std::invalid_argument("data window must cover the proposal interval and end with it");
  }
  if (count == 0) return {};
  const Frame frame{data.lower, region.lo, region.hi};
  RjmcmcKernel<Model> kernel{model, *data.stream, frame, region, settings};
  ChangepointConfiguration state = kernel.initial_state(rng);
  kernel.run(state, settings.burn_in, rng);
  const std::size_t thin = settings.thinning_for(count);
  std::vector<ChangepointConfiguration> draws;
  draws.reserve(count);
  for (std::size_t d = 0; d < count; ++d) {
    kernel.run(state, thin, rng);
    draws.push_back(state);
  }
  if (evaluations) *evaluations += kernel.evaluations();
  return draws;
}

}  // namespace cpsmc

#endif
