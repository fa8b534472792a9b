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

#ifndef CPSMC_SMCMC_HPP
#define CPSMC_SMCMC_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <cpsmc/configuration.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/models/segment_model.hpp>
#include <cpsmc/random.hpp>
#include <cpsmc/rjmcmc.hpp>
#include <cpsmc/summary.hpp>

namespace cpsmc {

struct SmcmcSettings {
  std::size_t iterations = 100000;
  std::size_t burn_in = 10000;
  std::size_t batches = 50;  // batch means for Monte Carlo standard errors
  MoveProbabilities moves;
  bool data_driven_birth = false;
  BirthProposal birth;

  [[nodiscard]] RjmcmcSettings kernel_settings() const {
    RjmcmcSettings s;
    s.iterations = iterations;
    s.burn_in = burn_in;
    s.moves = moves;
    s.data_driven_birth = data_driven_birth;
    s.birth = birth;
    return s;
  }

  void validate() const {
    kernel_settings().validate();
    if (batches < 2 || iterations - burn_in < batches) {
      throw std::invalid_argument("need at least two batches with one sample each");
    }
  }
};

/// Summary of the full-history chain at one update time.
struct SmcmcUpdate {
  double time = 0.0;
  IntensitySummary intensity;
  double intensity_se = kNaN;  // batch-means standard error of intensity.mean
  double k_mean = 0.0;
  double k_se = kNaN;
  ChangepointConfiguration map;
  double map_log_target = kNegInf;
  std::uint64_t evaluations = 0;
};

/// Mean and batch-means standard error of a chain trace.
inline std::pair<double, double> batch_means(std::span<const double> xs, std::size_t batches) {
  if (batches < 2 || xs.size() < batches) throw std::invalid_argument("too few samples for batch means");
  const std::size_t len = xs.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < len; ++i) means[b] += xs[b * len + i];
    means[b] /= static_cast<double>(len);
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(batches - 1);
  return {mean, std::sqrt(var / static_cast<double>(batches))};
}

/// Sequential MCMC reference: at every update time a full RJMCMC run over [0, t_n],
/// started from the highest-density state of the previous run.
template <SegmentModel Model>
std::vector<SmcmcUpdate> smcmc_run(const Model& model, const EventStream& events, std::span<const double> update_times,
                                   const SmcmcSettings& settings, Rng& rng) {
  settings.validate();
  const RjmcmcSettings ks = settings.kernel_settings();
  std::vector<SmcmcUpdate> out;
  out.reserve(update_times.size());
  ChangepointConfiguration start;
  bool have_start = false;
  double prev = 0.0;
  for (double t : update_times) {
    if (!(t > prev)) throw std::invalid_argument("update times must increase");
    prev = t;
    RjmcmcKernel<Model> kernel{model, events, Frame::whole(t), Region{0.0, t}, ks};
    ChangepointConfiguration c = have_start ? start : kernel.initial_state(rng);
    double lt = kernel.log_target(c);
    SmcmcUpdate u;
    u.time = t;
    u.map = c;
    u.map_log_target = lt;

    const std::size_t kept = settings.iterations - settings.burn_in;
    std::vector<double> lambda;
    std::vector<double> ks_trace;
    std::vector<std::pair<double, double>> draws;
    lambda.reserve(kept);
    ks_trace.reserve(kept);
    draws.reserve(kept);
    for (std::size_t it = 0; it < settings.iterations; ++it) {
      kernel.step(c, rng, &lt);
      if (lt > u.map_log_target) {
        u.map_log_target = lt;
        u.map = c;
      }
      if (it < settings.burn_in) continue;
      const Segment s = segment_at(c, Frame::whole(t), c.k());
      lambda.push_back(model.intensity_mean(s, events));
      ks_trace.push_back(static_cast<double>(c.k()));
      draws.emplace_back(model.sample_intensity(s, events, rng), 1.0);
    }
    std::tie(u.intensity.mean, u.intensity_se) = batch_means(lambda, settings.batches);
    std::tie(u.k_mean, u.k_se) = batch_means(ks_trace, settings.batches);
    u.intensity.q05 = weighted_quantile(draws, 0.05);
    u.intensity.q95 = weighted_quantile(std::move(draws), 0.95);
    u.evaluations = kernel.evaluations();
    start = u.map;
    have_start = true;
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace cpsmc

#endif
