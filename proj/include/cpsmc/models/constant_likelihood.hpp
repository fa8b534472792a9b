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

#ifndef CPSMC_MODELS_CONSTANT_LIKELIHOOD_HPP
#define CPSMC_MODELS_CONSTANT_LIKELIHOOD_HPP

#include <utility>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/random.hpp>
#include <cpsmc/truncated_gamma.hpp>

namespace cpsmc {

/// Wraps a segment model and drops its likelihood, leaving the prior as the target.
///
/// Useful for checking that a sampler recovers the changepoint prior.
template <class Model>
struct ConstantLikelihood {
  static constexpr bool has_levels = Model::has_levels;

  Model base;

  ConstantLikelihood() = default;
  explicit ConstantLikelihood(Model m) : base{std::move(m)} {}

  [[nodiscard]] double changepoint_rate() const noexcept { return base.changepoint_rate(); }

  [[nodiscard]] double segment_log_prior(const Segment& s) const { return base.segment_log_prior(s); }

  [[nodiscard]] double segment_log_marginal(const Segment&, const EventStream&) const noexcept { return 0.0; }

  [[nodiscard]] TruncatedGamma level_conditional(const Segment& s, double next_level, const EventStream& events,
                                                 bool = true) const
    requires Model::has_levels
  {
    return base.level_conditional(s, next_level, events, false);
  }

  [[nodiscard]] double intensity_mean(const Segment& s, const EventStream& events) const {
    return base.intensity_mean(s, events);
  }

  double sample_intensity(const Segment& s, const EventStream& events, Rng& rng) const {
    return base.sample_intensity(s, events, rng);
  }
};

}  // namespace cpsmc

#endif
