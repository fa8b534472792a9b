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

#ifndef CPSMC_MODELS_CHAINED_GAMMA_HPP
#define CPSMC_MODELS_CHAINED_GAMMA_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/models/poisson_gamma.hpp>
#include <cpsmc/random.hpp>

namespace cpsmc {

namespace detail {

inline double gamma_log_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace detail

/// Non-conjugate intensity prior: lambda_0 ~ Gamma(alpha0, beta0) and
/// lambda_i | lambda_{i-1} ~ Gamma(lambda_{i-1}^2 / chi, lambda_{i-1} / chi).
struct ChainedGammaPrior {
  double alpha0 = 4.5;
  double beta0 = 1.5;
  double chi = 5.0;

  ChainedGammaPrior() = default;
  ChainedGammaPrior(double a, double b, double c) : alpha0{a}, beta0{b}, chi{c} {
    if (!(alpha0 > 0.0 && beta0 > 0.0 && chi > 0.0)) {
      throw std::invalid_argument("chained gamma parameters must be positive");
    }
  }

  [[nodiscard]] double log_density(std::span<const double> levels) const {
    double lp = detail::gamma_log_pdf(levels[0], alpha0, beta0);
    for (std::size_t i = 1; i < levels.size(); ++i) {
      const double prev = levels[i - 1];
      lp += detail::gamma_log_pdf(levels[i], prev * prev / chi, prev / chi);
    }
    return lp;
  }
};

/// log of prod_i Gamma(lambda_i; alpha, beta).
inline double independent_gamma_log_density(std::span<const double> levels, double alpha, double beta) {
  double lp = 0.0;
  for (double l : levels) lp += detail::gamma_log_pdf(l, alpha, beta);
  return lp;
}

/// Reweights a conjugate-model particle carrying sampled intensities towards the chained prior.
///
/// Returns log_w + log p_chain(levels) - log p_indep(levels).
inline double chained_gamma_reweight(const ChangepointConfiguration& c, double log_w, double alpha, double beta,
                                     const ChainedGammaPrior& chain) {
  if (c.levels.size() != c.k() + 1) {
    throw std::invalid_argument("reweighting requires one sampled intensity per segment");
  }
  for (double l : c.levels) {
    if (!(l > 0.0)) throw std::invalid_argument("intensities must be positive");
  }
  return log_w + chain.log_density(c.levels) - independent_gamma_log_density(c.levels, alpha, beta);
}

/// Fills in one conjugate-posterior intensity draw per segment.
inline ChangepointConfiguration with_sampled_intensities(const ChangepointConfiguration& c, const Frame& frame,
                                                         const EventStream& events, double alpha, double beta,
                                                         Rng& rng) {
  ChangepointConfiguration out;
  out.taus = c.taus;
  out.levels.resize(c.k() + 1);
  for (std::size_t i = 0; i <= c.k(); ++i) {
    const Segment s = segment_at(c, frame, i);
    out.levels[i] = sample_segment_intensity(events.count(s.start, s.end), s.duration(), alpha, beta, rng);
  }
  return out;
}

}  // namespace cpsmc

#endif
