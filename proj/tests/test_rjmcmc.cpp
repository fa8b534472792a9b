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

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/poisson.hpp>
#include <gtest/gtest.h>

#include <cpsmc/models/constant_likelihood.hpp>
#include <cpsmc/models/poisson_gamma.hpp>
#include <cpsmc/models/shot_noise_cox.hpp>
#include <cpsmc/rjmcmc.hpp>

#include "oracles.hpp"

namespace {

using cpsmc::ChangepointConfiguration;
using PG = cpsmc::PoissonGammaModel;
using SNCP = cpsmc::ShotNoiseCoxModel;

// nu^k exp(-nu (b - a)) times the gamma evidence of every segment, first segment from `origin`.
double window_log_density(const ChangepointConfiguration& c, const cpsmc::EventStream& events, double origin, double a,
                          double b, double nu, double alpha, double beta) {
  double lp = static_cast<double>(c.k()) * std::log(nu) - nu * (b - a);
  double start = origin;
  for (std::size_t i = 0; i <= c.k(); ++i) {
    const double end = i < c.k() ? c.taus[i] : b;
    lp += cpsmc::gamma_segment_log_evidence(events.count(start, end), end - start, alpha, beta);
    start = end;
  }
  return lp;
}

std::vector<double> k_frequencies(const std::vector<ChangepointConfiguration>& draws, std::size_t cells) {
  std::vector<double> h(cells, 0.0);
  for (const auto& c : draws) h[std::min(c.k(), cells - 1)] += 1.0;
  return h;
}

// Counts for k < cells only; compares with an enumeration truncated at k = cells - 1.
std::vector<double> truncated_k_frequencies(const std::vector<ChangepointConfiguration>& draws, std::size_t cells) {
  std::vector<double> h(cells, 0.0);
  for (const auto& c : draws) {
    if (c.k() < cells) h[c.k()] += 1.0;
  }
  return h;
}

cpsmc::RjmcmcSettings thinned(std::size_t thin) {
  cpsmc::RjmcmcSettings s;
  s.thin = thin;
  return s;
}

TEST(Settings, Validation) {
  cpsmc::RjmcmcSettings s;
  EXPECT_NO_THROW(s.validate());
  s.moves.birth = 0.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.burn_in = s.iterations;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  EXPECT_EQ(s.thinning_for(100), 15u);
  EXPECT_EQ(s.thinning_for(10000), 1u);
}

TEST(WindowPosterior, ReturnsRequestedDrawsInsideRegion) {
  const cpsmc::EventStream events{{0.5, 1.5, 2.2, 2.3, 2.4, 3.9}};
  const PG model{1.0, 1.0, 1.0};
  cpsmc::Rng rng{1};
  for (std::size_t count : {1u, 100u, 5000u}) {
    const auto draws = cpsmc::sample_window_posterior(model, {1.0, 4.0}, {events, 0.2, 4.0}, {}, count, rng);
    ASSERT_EQ(draws.size(), count);
    for (const auto& c : draws) EXPECT_TRUE(cpsmc::is_valid(c, 1.0, 4.0));
  }
  EXPECT_THROW(cpsmc::sample_window_posterior(model, {2.0, 2.0}, {events, 2.0, 2.0}, {}, 10, rng),
               std::invalid_argument);
  EXPECT_THROW(cpsmc::sample_window_posterior(model, {1.0, 4.0}, {events, 1.5, 4.0}, {}, 10, rng),
               std::invalid_argument);
}

TEST(WindowPosterior, EmptyWindowWithTinyRateHasNoChangepoints) {
  const cpsmc::EventStream events;
  const double nu = 0.01;
  const PG model{nu, 1.0, 1.0};
  const auto mass = oracle::enumerate_by_k(
      [&](const ChangepointConfiguration& c) { return window_log_density(c, events, 0.0, 0.0, 1.0, nu, 1.0, 1.0); },
      0.0, 1.0, 2, {});
  const double p0 = mass[0] / (mass[0] + mass[1] + mass[2]);
  EXPECT_GT(p0, 0.95);
  cpsmc::Rng rng{2};
  const auto draws = cpsmc::sample_window_posterior(model, {0.0, 1.0}, {events, 0.0, 1.0}, {}, 2000, rng);
  const auto h = k_frequencies(draws, 3);
  EXPECT_GE(h[0] / 2000.0, 0.95);
}

TEST(WindowPosterior, BurstMatchesEnumeration) {
  const cpsmc::EventStream events{{4.9, 5.0, 5.1}};
  const double nu = 0.1;
  const double alpha = 1.0;
  const double beta = 4.0;
  const PG model{nu, alpha, beta};
  const auto mass = oracle::enumerate_by_k(
      [&](const ChangepointConfiguration& c) { return window_log_density(c, events, 0.0, 0.0, 10.0, nu, alpha, beta); },
      0.0, 10.0, 3, events.times(), 3);
  double total = 0.0;
  for (double m : mass) total += m;
  std::vector<double> p(mass.size());
  for (std::size_t k = 0; k < mass.size(); ++k) p[k] = mass[k] / total;
  const auto mode = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  EXPECT_GE(mode, 1u);

  cpsmc::Rng rng{3};
  const auto draws = cpsmc::sample_window_posterior(model, {0.0, 10.0}, {events, 0.0, 10.0}, thinned(25), 10000, rng);
  const auto h = truncated_k_frequencies(draws, 4);
  const auto chain_mode = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
  EXPECT_EQ(chain_mode, mode);
  EXPECT_GT(oracle::chi_square_p(h, p), 0.01) << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << p[3];
}

TEST(WindowPosterior, ConditioningDataBeforeTheWindowMatchesEnumeration) {
  const cpsmc::EventStream events{{0.2, 0.4, 1.1, 2.6, 2.7, 2.75, 2.8, 3.6}};
  const double nu = 0.3;
  const PG model{nu, 1.0, 1.0};
  const auto mass = oracle::enumerate_by_k(
      [&](const ChangepointConfiguration& c) { return window_log_density(c, events, 0.0, 1.5, 4.0, nu, 1.0, 1.0); },
      1.5, 4.0, 3, events.times(), 3);
  double total = 0.0;
  for (double m : mass) total += m;
  std::vector<double> p;
  for (double m : mass) p.push_back(m / total);
  cpsmc::Rng rng{4};
  const auto draws = cpsmc::sample_window_posterior(model, {1.5, 4.0}, {events, 0.0, 4.0}, thinned(25), 10000, rng);
  EXPECT_GT(oracle::chi_square_p(truncated_k_frequencies(draws, 4), p), 0.01);
}

TEST(WindowPosterior, PriorOnlyRecoversPoissonCount) {
  const double nu = 0.5;
  const cpsmc::EventStream events{{1.0, 1.1, 1.2}};
  const cpsmc::ConstantLikelihood<PG> flat{{nu, 1.0, 1.0}};
  cpsmc::Rng rng{5};
  const auto draws = cpsmc::sample_window_posterior(flat, {0.0, 5.0}, {events, 0.0, 5.0}, thinned(10), 10000, rng);
  const std::size_t cells = 12;
  const auto h = k_frequencies(draws, cells);
  const boost::math::poisson_distribution<double> pois(nu * 5.0);
  std::vector<double> p(cells);
  for (std::size_t k = 0; k + 1 < cells; ++k) p[k] = boost::math::pdf(pois, static_cast<double>(k));
  p[cells - 1] = boost::math::cdf(boost::math::complement(pois, static_cast<double>(cells - 2)));
  EXPECT_GT(oracle::chi_square_p(h, p), 0.01);
}

TEST(WindowPosterior, ShotNoisePriorOnlyRecoversPrior) {
  const double nu = 0.2;
  const double alpha = 1.5;
  const cpsmc::EventStream events;
  const cpsmc::ConstantLikelihood<SNCP> flat{{nu, 0.1, alpha}};
  cpsmc::Rng rng{6};
  const auto draws = cpsmc::sample_window_posterior(flat, {0.0, 10.0}, {events, 0.0, 10.0}, thinned(10), 10000, rng);
  const std::size_t cells = 10;
  const auto h = k_frequencies(draws, cells);
  const boost::math::poisson_distribution<double> pois(nu * 10.0);
  std::vector<double> p(cells);
  for (std::size_t k = 0; k + 1 < cells; ++k) p[k] = boost::math::pdf(pois, static_cast<double>(k));
  p[cells - 1] = boost::math::cdf(boost::math::complement(pois, static_cast<double>(cells - 2)));
  EXPECT_GT(oracle::chi_square_p(h, p), 0.01);
  std::vector<double> level0;
  std::vector<double> first_shot;
  for (const auto& c : draws) {
    level0.push_back(c.levels[0]);
    if (c.k() > 0) first_shot.push_back(c.levels[1] - c.levels[0] * std::exp(-0.1 * c.taus[0]));
  }
  auto exp_cdf = [&](double x) { return 1.0 - std::exp(-alpha * x); };
  EXPECT_GT(oracle::ks_one_sample_p(level0, exp_cdf), 0.01);
  EXPECT_GT(oracle::ks_one_sample_p(first_shot, exp_cdf), 0.01);
}

TEST(WindowPosterior, ShotNoiseDrawsRespectShotConstraint) {
  cpsmc::Rng sim{7};
  std::vector<double> ev;
  for (double t = 0.0;;) {
    t += cpsmc::sample_exponential(sim, t < 50.0 ? 0.5 : 3.0);
    if (t > 100.0) break;
    ev.push_back(t);
  }
  const cpsmc::EventStream events{ev};
  const SNCP model{0.05, 0.02, 1.0};
  cpsmc::RjmcmcSettings settings;
  settings.data_driven_birth = true;
  cpsmc::Rng rng{8};
  const auto draws = cpsmc::sample_window_posterior(model, {40.0, 100.0}, {events, 20.0, 100.0}, settings, 2000, rng);
  const cpsmc::Frame frame{20.0, 40.0, 100.0};
  std::size_t with_change = 0;
  for (const auto& c : draws) {
    ASSERT_TRUE(cpsmc::is_valid(c, 40.0, 100.0));
    ASSERT_EQ(c.levels.size(), c.k() + 1);
    for (std::size_t i = 1; i <= c.k(); ++i) {
      const auto s = cpsmc::segment_at(c, frame, i);
      EXPECT_GT(s.level, model.pre_shot_level(s));
    }
    with_change += c.k() > 0 ? 1 : 0;
  }
  EXPECT_GT(with_change, 1800u);
}

template <class Model>
void check_birth_death_reversibility(const Model& model, const cpsmc::EventStream& events) {
  constexpr bool levels = Model::has_levels;
  cpsmc::Rng rng{10};
  const cpsmc::Frame frame{0.0, 0.0, 20.0};
  cpsmc::RjmcmcKernel<Model> kernel{model, events, frame, {0.0, 20.0}, {}};
  for (int trial = 0; trial < 200; ++trial) {
    ChangepointConfiguration c;
    const std::size_t k = rng() % 4;
    for (std::size_t i = 0; i < k; ++i) c.taus.push_back(cpsmc::uniform(rng, 0.0, 20.0));
    std::sort(c.taus.begin(), c.taus.end());
    if constexpr (levels) {
      c.levels.push_back(cpsmc::uniform(rng, 0.5, 2.0));
      for (std::size_t i = 1; i <= k; ++i) {
        const auto s = cpsmc::segment_at(c, frame, i);
        c.levels.push_back(c.levels[i - 1] * std::exp(-0.05 * (s.start - s.prev_anchor)) + cpsmc::uniform(rng, 0.1, 2.0));
      }
    }
    const double s = cpsmc::uniform(rng, 0.0, 20.0);
    const auto j = static_cast<std::size_t>(std::lower_bound(c.taus.begin(), c.taus.end(), s) - c.taus.begin());
    double level = cpsmc::kNaN;
    if constexpr (levels) {
      auto probe = cpsmc::RjmcmcKernel<Model>::with_birth(c, s, 1.0);
      const auto tg = kernel.level_conditional(probe, j + 1);
      if (tg.empty()) continue;
      level = tg.sample(rng);
    }
    const double forward = kernel.birth_log_ratio(c, s, level);
    const auto next = cpsmc::RjmcmcKernel<Model>::with_birth(c, s, level);
    const double backward = kernel.death_log_ratio(next, j);
    if (!std::isfinite(forward)) continue;
    EXPECT_NEAR(forward + backward, 0.0, 1e-9) << "trial " << trial;

    if (c.k() > 0) {
      const std::size_t i = rng() % c.k();
      const double lo = i > 0 ? c.taus[i - 1] : 0.0;
      const double hi = i + 1 < c.k() ? c.taus[i + 1] : 20.0;
      const double moved = cpsmc::uniform(rng, lo, hi);
      auto shifted = c;
      shifted.taus[i] = moved;
      const double there = kernel.shift_log_ratio(c, i, moved);
      const double back = kernel.shift_log_ratio(shifted, i, c.taus[i]);
      if (std::isfinite(there)) {
        EXPECT_NEAR(there + back, 0.0, 1e-9);
      }
    }
  }
}

TEST(Moves, BirthDeathAndShiftAreReciprocal) {
  const cpsmc::EventStream events{{1.0, 2.5, 2.6, 7.0, 7.1, 7.2, 11.0, 15.5, 19.0}};
  check_birth_death_reversibility(PG{0.3, 1.0, 1.0}, events);
  check_birth_death_reversibility(SNCP{0.3, 0.05, 1.0}, events);
}

TEST(Moves, AcceptanceRatiosTouchOnlyAdjacentSegments) {
  const cpsmc::EventStream events{{1.0, 2.0, 3.0}};
  const PG model{0.3, 1.0, 1.0};
  ChangepointConfiguration big;
  for (int i = 1; i < 200; ++i) big.taus.push_back(i * 0.05);
  const ChangepointConfiguration small{{2.5, 5.0}, {}};
  for (const auto& c : {small, big}) {
    cpsmc::RjmcmcKernel<PG> kernel{model, events, cpsmc::Frame::whole(10.0), {0.0, 10.0}, {}};
    (void)kernel.birth_log_ratio(c, 4.321);
    EXPECT_LE(kernel.evaluations(), 5u);
    const auto before = kernel.evaluations();
    (void)kernel.death_log_ratio(c, 1);
    EXPECT_LE(kernel.evaluations() - before, 5u);
  }
}

TEST(Moves, KernelOnlyMovesChangepointsInsideRegion) {
  const cpsmc::EventStream events{{1.0, 2.0, 3.0, 6.0, 6.1, 6.2, 6.3}};
  const PG model{0.5, 1.0, 1.0};
  cpsmc::RjmcmcKernel<PG> kernel{model, events, cpsmc::Frame::whole(10.0), {5.0, 10.0}, {}};
  ChangepointConfiguration c{{1.5, 4.0}, {}};
  cpsmc::Rng rng{11};
  double lt = kernel.log_target(c);
  for (int i = 0; i < 5000; ++i) {
    kernel.step(c, rng, &lt);
    ASSERT_GE(c.k(), 2u);
    ASSERT_EQ(c.taus[0], 1.5);
    ASSERT_EQ(c.taus[1], 4.0);
    ASSERT_TRUE(cpsmc::is_valid(c, 0.0, 10.0));
  }
  EXPECT_NEAR(lt, kernel.log_target(c), 1e-8);
}

TEST(BirthDensity, DataDrivenIsANormalisedDensity) {
  const cpsmc::EventStream events{{0.5, 3.1, 3.2, 3.3, 3.4, 3.5, 8.0}};
  const auto d = cpsmc::BirthDensity::data_driven({0.0, 10.0}, events, {1.0, 1.0});
  std::vector<double> breaks;
  for (int b = 1; b < 10; ++b) breaks.push_back(b);
  EXPECT_NEAR(oracle::piecewise([&](double s) { return std::exp(d.log_density(s)); }, 0.0, 10.0, breaks), 1.0, 1e-12);
  EXPECT_NEAR(std::exp(d.log_density(3.5)), (5.0 + 1.0) / (7.0 + 10.0), 1e-12);
  cpsmc::Rng rng{12};
  std::vector<double> h(10, 0.0);
  std::vector<double> p(10);
  for (int b = 0; b < 10; ++b) p[b] = std::exp(d.log_density(b + 0.5));
  for (int i = 0; i < 20000; ++i) h[static_cast<std::size_t>(d.sample(rng))] += 1.0;
  EXPECT_GT(oracle::chi_square_p(h, p), 0.01);
  const auto u = cpsmc::BirthDensity::uniform({2.0, 6.0});
  EXPECT_NEAR(std::exp(u.log_density(3.0)), 0.25, 1e-15);
  EXPECT_EQ(u.log_density(7.0), cpsmc::kNegInf);
}

}  // namespace
