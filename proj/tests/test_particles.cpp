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

#include <cpsmc/particles.hpp>

#include "oracles.hpp"

namespace {

using cpsmc::ChangepointConfiguration;
using cpsmc::WeightedParticleSet;

ChangepointConfiguration at(double t) { return ChangepointConfiguration{{t}, {}}; }

WeightedParticleSet set_of(const std::vector<double>& weights) {
  WeightedParticleSet s;
  for (std::size_t i = 0; i < weights.size(); ++i) s.push_back(at(1.0 + static_cast<double>(i)), std::log(weights[i]));
  return s;
}

std::vector<double> flat_weights(const WeightedParticleSet& s) {
  std::vector<double> w;
  for (double lw : s.log_weights) w.push_back(std::exp(lw));
  return w;
}

double sum_sq(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  return s;
}

TEST(Ess, Examples) {
  EXPECT_DOUBLE_EQ(cpsmc::ess(std::vector<double>{1, 1, 1, 1}), 4.0);
  EXPECT_DOUBLE_EQ(cpsmc::ess(std::vector<double>{2, 0, 0, 0}), 1.0);
  EXPECT_NEAR(cpsmc::ess(std::vector<double>{0.5, 0.3, 0.2}), 1.0 / 0.38, 1e-12);
  EXPECT_THROW(cpsmc::ess(std::vector<double>{0, 0}), cpsmc::DegenerateWeightsError);
}

TEST(Ess, FromLogWeightsSurvivesHugeOffsets) {
  const std::vector<double> lw{1000.0 + std::log(0.5), 1000.0 + std::log(0.3), 1000.0 + std::log(0.2)};
  EXPECT_NEAR(cpsmc::ess_from_log(lw), 1.0 / 0.38, 1e-9);
  EXPECT_THROW(cpsmc::ess_from_log(std::vector<double>{cpsmc::kNegInf, cpsmc::kNegInf}), cpsmc::DegenerateWeightsError);
}

TEST(SystematicResample, HandTrace) {
  const auto counts = cpsmc::systematic_offspring(std::vector<double>{0.5, 0.3, 0.2}, 5, 0.01);
  EXPECT_EQ(counts, (std::vector<std::size_t>{3, 1, 1}));
}

TEST(SystematicResample, SingleParticleIsRepeated) {
  WeightedParticleSet s;
  s.push_back(at(2.5), -3.0);
  cpsmc::Rng rng{1};
  const auto out = cpsmc::systematic_resample(s, 7, rng);
  ASSERT_EQ(out.size(), 7u);
  for (const auto& p : out.particles) EXPECT_TRUE(cpsmc::identical(p, s.particles[0]));
  for (double lw : out.log_weights) EXPECT_EQ(lw, 0.0);
}

TEST(SystematicResample, DegenerateWeightsThrow) {
  WeightedParticleSet s;
  s.push_back(at(1.0), cpsmc::kNegInf);
  cpsmc::Rng rng{1};
  EXPECT_THROW(cpsmc::systematic_resample(s, 3, rng), cpsmc::DegenerateWeightsError);
}

TEST(SystematicResample, UnbiasedOffspring) {
  const std::vector<double> w{0.05, 0.4, 0.15, 0.3, 0.1};
  const std::size_t count = 7;
  const int runs = 100000;
  std::vector<std::vector<double>> samples(w.size());
  cpsmc::Rng rng{2024};
  const auto set = set_of(w);
  for (int r = 0; r < runs; ++r) {
    std::vector<std::size_t> anc;
    cpsmc::systematic_resample(set, count, rng, &anc);
    std::vector<double> c(w.size(), 0.0);
    for (auto a : anc) c[a] += 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) samples[i].push_back(c[i]);
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double expected = static_cast<double>(count) * w[i];
    EXPECT_NEAR(oracle::mean(samples[i]), expected, 3.0 * oracle::standard_error(samples[i]) + 1e-12) << i;
  }
}

TEST(SystematicResample, LargeCountRecoversWeights) {
  const std::vector<double> w{0.123, 0.456, 0.021, 0.4};
  cpsmc::Rng rng{5};
  std::vector<std::size_t> anc;
  cpsmc::systematic_resample(set_of(w), 100000, rng, &anc);
  std::vector<double> freq(w.size(), 0.0);
  for (auto a : anc) freq[a] += 1.0 / 100000.0;
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(freq[i], w[i], 1e-5);
}

TEST(ReplicateTo, HandTracedExample) {
  const auto out = cpsmc::replicate_to(set_of({0.7, 0.2, 0.1}), 5);
  ASSERT_EQ(out.size(), 5u);
  const auto unique = cpsmc::deduplicate(out.particles);
  EXPECT_EQ(unique.multiplicity, (std::vector<std::size_t>{3, 1, 1}));
  const auto w = flat_weights(out);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[i], 0.7 / 3.0, 1e-15);
  EXPECT_NEAR(w[3], 0.2, 1e-15);
  EXPECT_NEAR(w[4], 0.1, 1e-15);
  EXPECT_NEAR(sum_sq(w), 0.2133333333333333, 1e-12);
  const std::vector<double> bar{0.7, 0.2, 0.1};
  const std::vector<std::size_t> ones{1, 1, 1};
  EXPECT_NEAR(oracle::min_sum_squares(bar, ones, 5), 0.2133333333333333, 1e-12);
}

TEST(ReplicateTo, SameSizeIsIdentity) {
  const auto in = set_of({0.3, 0.5, 0.2});
  const auto out = cpsmc::replicate_to(in, 3);
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(cpsmc::identical(out.particles[i], in.particles[i]));
    EXPECT_NEAR(out.log_weights[i], in.log_weights[i], 1e-15);
  }
}

TEST(ReplicateTo, ShrinkingThrows) { EXPECT_THROW(cpsmc::replicate_to(set_of({0.5, 0.5}), 1), std::invalid_argument); }

TEST(ReplicateTo, GreedyStepPicksLargestReduction) {
  // Step-by-step replay of the greedy rule with unit blocks.
  cpsmc::Rng rng{77};
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<double> w(n);
    for (auto& x : w) x = cpsmc::uniform(rng, 0.01, 1.0);
    std::vector<std::size_t> m0(n, 1);
    const std::size_t target = n + rng() % 10;
    const auto m = cpsmc::replication_counts(w, m0, target);
    std::vector<std::size_t> greedy(n, 1);
    for (std::size_t step = n; step < target; ++step) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < n; ++i) {
        const double di = w[i] * w[i] / ((greedy[i] + 1.0) * greedy[i]);
        const double db = w[best] * w[best] / ((greedy[best] + 1.0) * greedy[best]);
        if (di > db) best = i;
      }
      ++greedy[best];
    }
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a += w[i] * w[i] / static_cast<double>(m[i]);
      b += w[i] * w[i] / static_cast<double>(greedy[i]);
    }
    EXPECT_NEAR(a, b, 1e-12 * b) << "trial " << trial;
  }
}

TEST(ReplicateTo, RandomInstancesKeepInvariants) {
  cpsmc::Rng rng{11};
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    WeightedParticleSet s;
    for (std::size_t i = 0; i < n; ++i) {
      // Some particles are copies of earlier ones.
      const bool copy = i > 0 && rng() % 3 == 0;
      s.push_back(copy ? s.particles[rng() % i] : at(static_cast<double>(i) + 0.5),
                  std::log(cpsmc::uniform(rng, 1e-3, 1.0)));
    }
    const std::size_t target = n + rng() % (13 - n);
    const auto w_in = flat_weights(s);
    std::vector<std::size_t> anc;
    const auto out = cpsmc::replicate_to(s, target, &anc);
    const auto w_out = flat_weights(out);
    ASSERT_EQ(out.size(), target);
    const double sum_in = std::accumulate(w_in.begin(), w_in.end(), 0.0);
    const double sum_out = std::accumulate(w_out.begin(), w_out.end(), 0.0);
    EXPECT_NEAR(sum_out, sum_in, 1e-12);
    EXPECT_LE(sum_sq(w_out), sum_sq(w_in) * (1.0 + 1e-12));
    EXPECT_GE(cpsmc::ess(w_out), cpsmc::ess(w_in) * (1.0 - 1e-12));
    // Every copy of a unique particle carries the same weight.
    const auto u = cpsmc::deduplicate(out.particles);
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out.log_weights[i], out.log_weights[u.first_index[u.group_of[i]]]);
    }
    // Weighted mean of a test function is unchanged.
    double f_in = 0.0;
    double f_out = 0.0;
    for (std::size_t i = 0; i < n; ++i) f_in += w_in[i] * std::sin(s.particles[i].taus[0]);
    for (std::size_t i = 0; i < target; ++i) f_out += w_out[i] * std::sin(out.particles[i].taus[0]);
    EXPECT_NEAR(f_out / sum_out, f_in / sum_in, 1e-12);
  }
}

TEST(ReplicateTo, GreedyCloseToBruteForceOptimum) {
  cpsmc::Rng rng{3};
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    std::vector<double> w(n);
    for (auto& x : w) x = cpsmc::uniform(rng, 1e-3, 1.0);
    const std::vector<std::size_t> m0(n, 1);
    const std::size_t target = n + rng() % (11 - n);
    const auto m = cpsmc::replication_counts(w, m0, target);
    double greedy = 0.0;
    for (std::size_t i = 0; i < n; ++i) greedy += w[i] * w[i] / static_cast<double>(m[i]);
    const double best = oracle::min_sum_squares(w, m0, target);
    worst = std::max(worst, greedy / best - 1.0);
  }
  RecordProperty("worst_relative_gap", std::to_string(worst));
  EXPECT_LE(worst, 0.05);
}

TEST(PadNewParticles, ModuloRule) {
  const std::vector<int> ab{1, 2};
  EXPECT_EQ(cpsmc::pad_new_particles(ab, 5), (std::vector<int>{1, 2, 1, 2, 1}));
  EXPECT_EQ(cpsmc::pad_new_particles(std::vector<int>{7}, 3), (std::vector<int>{7, 7, 7}));
  EXPECT_EQ(cpsmc::pad_new_particles(std::vector<int>{1, 2, 3}, 3), (std::vector<int>{1, 2, 3}));
  EXPECT_THROW(cpsmc::pad_new_particles(std::vector<int>{}, 3), std::invalid_argument);
  EXPECT_THROW(cpsmc::pad_new_particles(ab, 1), std::invalid_argument);
}

TEST(Deduplicate, BitIdenticalCopiesOnly) {
  std::vector<ChangepointConfiguration> ps{at(1.0), at(2.0), at(1.0), at(std::nextafter(1.0, 2.0))};
  ps.push_back(ChangepointConfiguration{{1.0}, {0.5, 0.7}});
  const auto u = cpsmc::deduplicate(ps);
  EXPECT_EQ(u.size(), 4u);
  EXPECT_EQ(u.multiplicity[0], 2u);
  EXPECT_EQ(u.group_of[2], 0u);
}

TEST(WeightedParticleSet, DeduplicatedViewRepresentsSameMeasure) {
  auto s = set_of({0.2, 0.3});
  s.push_back(s.particles[0], std::log(0.2));
  const auto w = s.normalized_weights();
  const auto u = cpsmc::deduplicate(s.particles);
  std::vector<double> bar(u.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) bar[u.group_of[i]] += w[i];
  EXPECT_NEAR(bar[0], 0.4 / 0.7, 1e-15);
  EXPECT_NEAR(bar[1], 0.3 / 0.7, 1e-15);
}

}  // namespace
