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
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include <cpsmc/models/poisson_gamma.hpp>
#include <cpsmc/multistream.hpp>
#include <cpsmc/simulate.hpp>

namespace {

using PG = cpsmc::PoissonGammaModel;

std::size_t sum(const std::vector<std::size_t>& xs) { return std::accumulate(xs.begin(), xs.end(), std::size_t{0}); }

TEST(Allocate, EqualScoresSplitEvenly) {
  const std::vector<double> scores(400, 1.0);
  const cpsmc::StreamBudget budget{4000000, 500, {}};
  const auto a = cpsmc::allocate(scores, budget);
  ASSERT_EQ(a.size(), 400u);
  for (auto m : a) EXPECT_EQ(m, 10000u);
}

TEST(Allocate, FloorsThenProportional) {
  const std::vector<double> scores{1.0, 0.0, 0.0};
  EXPECT_EQ(cpsmc::allocate(scores, {3000, 500, {}}), (std::vector<std::size_t>{2000, 500, 500}));
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  EXPECT_EQ(cpsmc::allocate(zeros, {10, 0, {}}), (std::vector<std::size_t>{4, 3, 3}));
}

TEST(Allocate, RejectsInfeasibleInputs) {
  const std::vector<double> scores{1.0, 1.0};
  EXPECT_THROW(cpsmc::allocate(scores, {100, 60, {}}), std::invalid_argument);
  EXPECT_THROW(cpsmc::allocate(std::vector<double>{}, {100, 0, {}}), std::invalid_argument);
  EXPECT_THROW(cpsmc::allocate(std::vector<double>{-1.0, 1.0}, {100, 0, {}}), std::invalid_argument);
  EXPECT_THROW(cpsmc::allocate(std::vector<double>{std::nan(""), 1.0}, {100, 0, {}}), std::invalid_argument);
}

TEST(Allocate, RandomInstancesSumExactly) {
  cpsmc::Rng rng{1};
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> scores(n);
    for (auto& s : scores) {
      const auto kind = rng() % 4;
      s = kind == 0 ? 0.0 : kind == 1 ? cpsmc::uniform(rng, 0.0, 1e-9) : cpsmc::uniform(rng, 0.0, 1e6);
    }
    const std::size_t floor = rng() % 20;
    const std::size_t total = floor * n + rng() % 100000;
    if (total == 0) continue;
    const auto a = cpsmc::allocate(scores, {total, floor, {}});
    ASSERT_EQ(a.size(), n);
    ASSERT_EQ(sum(a), total);
    for (auto m : a) ASSERT_GE(m, floor);
  }
}

TEST(ComplexityScore, Examples) {
  const std::vector<std::size_t> all_zero{100};
  EXPECT_EQ(cpsmc::complexity_score(all_zero, 0.0), 0.0);
  const std::vector<std::size_t> half{50, 50};
  EXPECT_NEAR(cpsmc::complexity_score(half, 0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(cpsmc::complexity_score(half, 0.5, 0.25), std::log(2.0) + 0.75, 1e-15);
}

TEST(ComplexityScore, MonotoneInEntropyAndVariance) {
  cpsmc::Rng rng{2};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::size_t> counts(1 + rng() % 5);
    for (auto& c : counts) c = rng() % 100;
    const double v = cpsmc::uniform(rng, 0.0, 5.0);
    const double base = cpsmc::complexity_score(counts, v);
    EXPECT_GE(base, 0.0);
    EXPECT_GT(cpsmc::complexity_score(counts, v + 0.1), base);
    // Moving one count from the largest cell to an empty one raises the entropy.
    auto spread = counts;
    const auto big = std::max_element(spread.begin(), spread.end());
    if (*big < 2) continue;
    --*big;
    spread.push_back(1);
    EXPECT_GT(cpsmc::complexity_score(spread, v), base);
  }
}

std::vector<cpsmc::EventStream> make_streams(std::size_t n, double horizon, std::uint64_t seed) {
  std::vector<cpsmc::EventStream> out;
  for (std::size_t j = 0; j < n; ++j) {
    auto rng = cpsmc::make_stream_rng(seed, j, 7);
    const double rate = cpsmc::uniform(rng, 1.0, 4.0);
    out.emplace_back(cpsmc::simulate_piecewise_poisson({{horizon / 2}, {rate, 2.0 * rate}}, horizon, rng).events);
  }
  return out;
}

std::vector<double> unit_grid(int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  std::iota(t.begin(), t.end(), 1.0);
  return t;
}

TEST(RunParallel, SingleStreamIsPlainSmc) {
  const auto streams = make_streams(1, 12.0, 3);
  const std::vector<PG> models{{0.1, 1.0, 1.0}};
  const auto times = unit_grid(12);
  cpsmc::MultiStreamSettings settings;
  settings.smc.particles = 150;
  settings.budget = {150, 20, {}};
  settings.seed = 4;
  const auto result = cpsmc::run_parallel<PG>(streams, models, times, settings);

  auto rng = cpsmc::make_stream_rng(4, 0, 0);
  cpsmc::SmcState state;
  for (double t : times) cpsmc::smc_update(state, models[0], streams[0], t, settings.smc, rng, 150);
  const auto& got = result.states[0];
  ASSERT_EQ(got.set.size(), state.set.size());
  for (std::size_t i = 0; i < state.set.size(); ++i) {
    EXPECT_TRUE(cpsmc::identical(got.set.particles[i], state.set.particles[i]));
    EXPECT_EQ(got.set.log_weights[i], state.set.log_weights[i]);
  }
  EXPECT_EQ(got.log_normalizer, state.log_normalizer);
}

TEST(RunParallel, StreamsAreIndependentGivenAllocations) {
  const auto streams = make_streams(3, 10.0, 5);
  const std::vector<PG> models{{0.1, 1.0, 1.0}};
  const auto times = unit_grid(10);
  cpsmc::MultiStreamSettings settings;
  settings.smc.particles = 100;
  settings.budget = {600, 50, {}};
  settings.seed = 6;
  settings.threads = 3;
  const std::vector<std::size_t> fixed{300, 200, 100};
  settings.allocator = [&](std::span<const double>, const cpsmc::StreamBudget&) { return fixed; };
  const auto together = cpsmc::run_parallel<PG>(streams, models, times, settings);
  for (std::size_t j = 0; j < 3; ++j) {
    auto rng = cpsmc::make_stream_rng(6, j, 0);
    cpsmc::SmcState alone;
    for (double t : times) cpsmc::smc_update(alone, models[0], streams[j], t, settings.smc, rng, fixed[j]);
    const auto& s = together.states[j];
    ASSERT_EQ(s.set.size(), alone.set.size());
    for (std::size_t i = 0; i < s.set.size(); ++i) {
      ASSERT_TRUE(cpsmc::identical(s.set.particles[i], alone.set.particles[i]));
      ASSERT_EQ(s.set.log_weights[i], alone.set.log_weights[i]);
    }
  }
}

TEST(RunParallel, BudgetIsConservedAndLogged) {
  const auto streams = make_streams(5, 8.0, 7);
  const std::vector<PG> models{{0.1, 1.0, 1.0}};
  const auto times = unit_grid(8);
  for (auto timing : {cpsmc::ScoreTiming::kPilot, cpsmc::ScoreTiming::kPreviousUpdate}) {
    cpsmc::MultiStreamSettings settings;
    settings.smc.particles = 100;
    settings.budget = {1000, 40, {}};
    settings.timing = timing;
    settings.threads = 2;
    const auto r = cpsmc::run_parallel<PG>(streams, models, times, settings);
    ASSERT_EQ(r.allocations.size(), 5u * 8u);
    for (std::size_t u = 0; u < 8; ++u) {
      std::size_t total = 0;
      for (std::size_t j = 0; j < 5; ++j) {
        const auto& rec = r.allocations[u * 5 + j];
        EXPECT_EQ(rec.update, u + 1);
        EXPECT_EQ(rec.stream, j);
        EXPECT_GE(rec.allocation, 40u);
        EXPECT_GE(rec.score, 0.0);
        EXPECT_GE(rec.ess, 1.0);
        total += rec.allocation;
      }
      EXPECT_EQ(total, 1000u);
    }
  }
  cpsmc::MultiStreamSettings broken;
  broken.budget = {100, 0, {}};
  broken.allocator = [](std::span<const double> s, const cpsmc::StreamBudget&) {
    return std::vector<std::size_t>(s.size(), 1);
  };
  EXPECT_THROW(cpsmc::run_parallel<PG>(streams, models, times, broken), std::logic_error);
}

TEST(RunParallel, ReplicationNeverLowersEss) {
  const auto streams = make_streams(1, 6.0, 8);
  const PG model{0.2, 1.0, 1.0};
  cpsmc::SmcSettings settings;
  settings.particles = 80;
  settings.ess_threshold = 0.0;
  auto rng = cpsmc::make_stream_rng(9, 0);
  cpsmc::SmcState state;
  for (int u = 1; u <= 6; ++u) {
    cpsmc::smc_update(state, model, streams[0], u, settings, rng);
    const double before = cpsmc::ess_from_log(state.set.log_weights);
    for (std::size_t target : {80u, 81u, 160u, 1000u}) {
      const auto grown = cpsmc::replicate_to(state.set, target);
      ASSERT_EQ(grown.size(), target);
      EXPECT_GE(cpsmc::ess_from_log(grown.log_weights), before * (1.0 - 1e-12));
    }
  }
}

TEST(AnomalyScore, BurstWindowScoresFiveTimesQuietMedian) {
  auto rng = cpsmc::make_stream_rng(0, 0, 5);
  const double base = 5.0;
  const auto sim = cpsmc::simulate_piecewise_poisson({{39.5}, {base, 4.0 * base}}, 48.0, rng);
  const std::vector<cpsmc::EventStream> streams{cpsmc::EventStream{sim.events}};
  const std::vector<PG> models{{0.02, 1.0, 0.2}};
  const auto times = unit_grid(48);
  cpsmc::MultiStreamSettings settings;
  settings.smc.particles = 400;
  settings.budget = {400, 100, {}};
  settings.seed = 0;
  const auto r = cpsmc::run_parallel<PG>(streams, models, times, settings);
  std::vector<double> quiet;
  for (std::size_t u = 1; u < 39; ++u) quiet.push_back(r.allocations[u].score);
  std::nth_element(quiet.begin(), quiet.begin() + quiet.size() / 2, quiet.end());
  const double median = quiet[quiet.size() / 2];
  EXPECT_GE(r.allocations[39].score, 5.0 * median);
}

}  // namespace
