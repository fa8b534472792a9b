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

#ifndef CPSMC_MODELS_POISSON_GAMMA_HPP
#define CPSMC_MODELS_POISSON_GAMMA_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/random.hpp>

namespace cpsmc {

/// Log prior density of k ordered changepoints on (a, b] under a rate-nu Poisson process.
inline double cp_prior_log_density(std::span<const double> taus, double a, double b, double nu) {
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > a && taus[i] < b) || (i > 0 && !(taus[i] > taus[i - 1]))) {
      throw InvalidConfigurationError("changepoints must be strictly increasing inside (a, b)");
    }
  }
  return static_cast<double>(taus.size()) * std::log(nu) - nu * (b - a);
}

/// Log marginal likelihood of r Poisson events over a segment of length delta, with the
/// rate integrated against a Gamma(alpha, beta) prior.
inline double gamma_segment_log_evidence(std::size_t r, double delta, double alpha, double beta) {
  if (!(delta > 0.0)) throw std::invalid_argument("segment duration must be positive");
  const double rr = static_cast<double>(r);
  return alpha * std::log(beta) - std::lgamma(alpha) + std::lgamma(alpha + rr) - (alpha + rr) * std::log(beta + delta);
}

/// Draw from the conjugate posterior Gamma(alpha + r, beta + delta) of a segment's rate.
inline double sample_segment_intensity(std::size_t r, double delta, double alpha, double beta, Rng& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("segment duration must be positive");
  return sample_gamma(rng, alpha + static_cast<double>(r), beta + delta);
}

/// Piecewise-constant Poisson intensity with independent Gamma(alpha, beta) segment rates,
/// integrated out analytically.
struct PoissonGammaModel {
  static constexpr bool has_levels = false;

  double nu = 1.0;
  double alpha = 1.0;
  double beta = 1.0;

  PoissonGammaModel() = default;
  PoissonGammaModel(double nu_, double alpha_, double beta_) : nu{nu_}, alpha{alpha_}, beta{beta_} {
    if (!(nu > 0.0 && alpha > 0.0 && beta > 0.0)) {
      throw std::invalid_argument("Poisson-gamma parameters must be positive");
    }
  }

  [[nodiscard]] double changepoint_rate() const noexcept { return nu; }

  [[nodiscard]] double segment_log_prior(const Segment&) const noexcept { return 0.0; }

  [[nodiscard]] double segment_log_marginal(const Segment& s, const EventStream& events) const {
    return gamma_segment_log_evidence(events.count(s.start, s.end), s.duration(), alpha, beta);
  }

  /// Posterior mean of the rate at the end of segment s.
  [[nodiscard]] double intensity_mean(const Segment& s, const EventStream& events) const {
    return (alpha + static_cast<double>(events.count(s.start, s.end))) / (beta + s.duration());
  }

  double sample_intensity(const Segment& s, const EventStream& events, Rng& rng) const {
    return sample_segment_intensity(events.count(s.start, s.end), s.duration(), alpha, beta, rng);
  }
};

}  // namespace cpsmc

#endif
