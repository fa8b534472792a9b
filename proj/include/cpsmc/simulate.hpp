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

#ifndef CPSMC_SIMULATE_HPP
#define CPSMC_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <cpsmc/configuration.hpp>
#include <cpsmc/random.hpp>

namespace cpsmc {

/// Piecewise-constant intensity: rates[i] applies on (changepoints[i-1], changepoints[i]].
struct PiecewiseRate {
  std::vector<double> changepoints;
  std::vector<double> rates;

  void validate() const {
    if (rates.size() != changepoints.size() + 1) throw std::invalid_argument("need one rate per segment");
    for (double r : rates) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("rates must be finite and nonnegative");
    }
    for (std::size_t i = 1; i < changepoints.size(); ++i) {
      if (!(changepoints[i] > changepoints[i - 1])) throw std::invalid_argument("changepoints must increase");
    }
  }

  [[nodiscard]] double at(double t) const {
    const auto i = std::lower_bound(changepoints.begin(), changepoints.end(), t) - changepoints.begin();
    return rates[static_cast<std::size_t>(i)];
  }
};

/// Simulated events plus the ground truth that produced them.
struct SimulatedStream {
  std::vector<double> events;
  std::vector<double> changepoints;
  std::vector<double> levels;  // rate (or post-shot intensity) of each segment
};

/// Piecewise Poisson events on (0, horizon] by time rescaling: unit-rate exponential gaps on
/// the cumulative-intensity scale, mapped back through its inverse.
inline SimulatedStream simulate_piecewise_poisson(const PiecewiseRate& rate, double horizon, Rng& rng) {
  rate.validate();
  SimulatedStream out;
  out.levels = rate.rates;
  double start = 0.0;
  double carry = sample_exponential(rng, 1.0);
  for (std::size_t i = 0; i <= rate.changepoints.size(); ++i) {
    const double end = std::min(i < rate.changepoints.size() ? rate.changepoints[i] : horizon, horizon);
    if (i < rate.changepoints.size() && rate.changepoints[i] < horizon) out.changepoints.push_back(rate.changepoints[i]);
    const double r = rate.rates[i];
    double mass = r * (end - start);
    double pos = start;
    while (r > 0.0 && carry <= mass) {
      pos += carry / r;
      mass -= carry;
      out.events.push_back(pos);
      carry = sample_exponential(rng, 1.0);
    }
    carry -= mass;
    start = end;
    if (start >= horizon) break;
  }
  return out;
}

/// Same law as simulate_piecewise_poisson, generated by thinning a homogeneous process at
/// the maximum rate.
inline SimulatedStream simulate_piecewise_poisson_thinning(const PiecewiseRate& rate, double horizon, Rng& rng) {
  rate.validate();
  SimulatedStream out;
  out.levels = rate.rates;
  for (double c : rate.changepoints) {
    if (c < horizon) out.changepoints.push_back(c);
  }
  const double top = *std::max_element(rate.rates.begin(), rate.rates.end());
  if (!(top > 0.0)) return out;
  double t = 0.0;
  for (;;) {
    t += sample_exponential(rng, top);
    if (t > horizon) break;
    if (uniform01(rng) * top < rate.at(t)) out.events.push_back(t);
  }
  return out;
}

/// Shot-noise Cox process on (0, horizon]: initial intensity and shot sizes Exp(alpha),
/// shots at rate nu, exponential decay at rate kappa. Events are drawn by thinning within
/// each inter-shot interval, where the intensity is largest at the left end.
inline SimulatedStream simulate_shot_noise_cox(double nu, double kappa, double alpha, double horizon, Rng& rng) {
  if (!(nu > 0.0 && kappa > 0.0 && alpha > 0.0 && horizon > 0.0)) {
    throw std::invalid_argument("shot-noise Cox parameters must be positive");
  }
  SimulatedStream out;
  double t = 0.0;
  for (;;) {
    t += sample_exponential(rng, nu);
    if (t >= horizon) break;
    out.changepoints.push_back(t);
  }
  double level = sample_exponential(rng, alpha);
  double anchor = 0.0;
  out.levels.push_back(level);
  for (std::size_t i = 0; i <= out.changepoints.size(); ++i) {
    const double end = i < out.changepoints.size() ? out.changepoints[i] : horizon;
    double s = anchor;
    for (;;) {
      const double bound = level * std::exp(-kappa * (s - anchor));
      if (!(bound > 0.0)) break;
      s += sample_exponential(rng, bound);
      if (s > end) break;
      const double current = level * std::exp(-kappa * (s - anchor));
      if (uniform01(rng) * bound < current) out.events.push_back(s);
    }
    if (i < out.changepoints.size()) {
      level = level * std::exp(-kappa * (end - anchor)) + sample_exponential(rng, alpha);
      anchor = end;
      out.levels.push_back(level);
    }
  }
  return out;
}

}  // namespace cpsmc

#endif
