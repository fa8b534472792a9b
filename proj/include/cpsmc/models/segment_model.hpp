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

#ifndef CPSMC_MODELS_SEGMENT_MODEL_HPP
#define CPSMC_MODELS_SEGMENT_MODEL_HPP

#include <concepts>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/random.hpp>
#include <cpsmc/truncated_gamma.hpp>

namespace cpsmc {

/// What the samplers need from a model: a changepoint rate and per-segment log prior and
/// log marginal likelihood terms. The joint log density of a configuration is
/// k log(nu) - nu |interval| plus the sum of both terms over its segments.
template <class M>
concept SegmentModel = requires(const M& m, const Segment& s, const EventStream& e, Rng& rng) {
  { M::has_levels } -> std::convertible_to<bool>;
  { m.changepoint_rate() } -> std::convertible_to<double>;
  { m.segment_log_prior(s) } -> std::convertible_to<double>;
  { m.segment_log_marginal(s, e) } -> std::convertible_to<double>;
  { m.intensity_mean(s, e) } -> std::convertible_to<double>;
  { m.sample_intensity(s, e, rng) } -> std::convertible_to<double>;
};

/// Models that carry explicit segment levels also supply each level's full conditional.
template <class M>
concept LevelModel = SegmentModel<M> && M::has_levels && requires(const M& m, const Segment& s, const EventStream& e) {
  { m.level_conditional(s, 0.0, e) } -> std::convertible_to<TruncatedGamma>;
};

}  // namespace cpsmc

#endif
