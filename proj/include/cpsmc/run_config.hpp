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

#ifndef CPSMC_RUN_CONFIG_HPP
#define CPSMC_RUN_CONFIG_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <cpsmc/io.hpp>
#include <cpsmc/models/chained_gamma.hpp>
#include <cpsmc/models/poisson_gamma.hpp>
#include <cpsmc/models/shot_noise_cox.hpp>
#include <cpsmc/multistream.hpp>
#include <cpsmc/smc.hpp>
#include <cpsmc/smcmc.hpp>

namespace cpsmc {

enum class ModelKind { kPoissonGamma, kChainedGamma, kShotNoiseCox };
enum class StreamKind { kPiecewisePoisson, kShotNoiseCox };

/// Everything a command-line run needs, read from `key = value` pairs.
struct RunConfig {
  ModelKind model = ModelKind::kPoissonGamma;
  double nu = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double kappa = 0.01;
  MergeShift merge_shift = MergeShift::kShotPreserving;
  ChainedGammaPrior chain;

  std::size_t updates = 0;
  double spacing = 1.0;
  std::vector<double> times;

  std::size_t particles = 1000;
  std::size_t budget = 0;
  std::size_t floor = 0;
  double ess_threshold = 1.0 / 3.0;

  RjmcmcSettings window;
  bool move = true;
  std::size_t move_sweeps = 1;
  TStarRule t_star = TStarRule::kPosteriorMean;
  bool permute = true;

  std::size_t smcmc_iterations = 100000;
  std::size_t smcmc_burn_in = 10000;
  std::size_t batches = 50;

  ScoreTiming score_timing = ScoreTiming::kPilot;
  std::size_t threads = 0;
  std::uint64_t seed = 1;
  std::string output = ".";
  std::vector<std::string> events;
  bool strict = false;

  StreamKind kind = StreamKind::kPiecewisePoisson;
  double horizon = 100.0;
  std::vector<double> rates{1.0};
  std::vector<double> changepoints;

  static const std::set<std::string>& keys() {
    static const std::set<std::string> k{
        "model", "nu", "alpha", "beta", "kappa", "merge_shift", "chain_alpha", "chain_beta", "chi",
        "updates", "spacing", "times", "particles", "budget", "floor", "ess_threshold",
        "iterations", "burn_in", "thin", "data_driven_birth", "birth_bin_width", "move", "move_sweeps",
        "t_star", "permute", "smcmc_iterations", "smcmc_burn_in", "batches", "score_timing", "threads",
        "seed", "output", "events", "strict", "kind", "horizon", "rates", "changepoints"};
    return k;
  }

  /// Reads known keys; unknown keys and malformed values throw std::invalid_argument.
  static RunConfig from_map(const std::map<std::string, std::string>& kv) {
    RunConfig c;
    for (const auto& [key, value] : kv) {
      if (!keys().count(key)) throw std::invalid_argument("unknown setting '" + key + "'");
      try {
        c.assign(key, value);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(key + ": " + e.what());
      }
    }
    c.validate();
    return c;
  }

  /// Update times: the explicit list if given, else spacing, 2 spacing, ..., updates spacing.
  [[nodiscard]] std::vector<double> grid() const {
    if (!times.empty()) return times;
    std::vector<double> g(updates);
    for (std::size_t i = 0; i < updates; ++i) g[i] = spacing * static_cast<double>(i + 1);
    return g;
  }

  void validate() const {
    if (!(nu > 0.0 && alpha > 0.0 && beta > 0.0 && kappa > 0.0)) {
      throw std::invalid_argument("model parameters must be positive");
    }
    if (!(chain.alpha0 > 0.0 && chain.beta0 > 0.0 && chain.chi > 0.0)) {
      throw std::invalid_argument("chained gamma parameters must be positive");
    }
    if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
    const auto g = grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(g[i] > (i ? g[i - 1] : 0.0))) throw std::invalid_argument("update times must be positive and increasing");
    }
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    smc_settings().validate();
  }

  [[nodiscard]] SmcSettings smc_settings() const {
    SmcSettings s;
    s.particles = particles;
    s.ess_threshold = ess_threshold;
    s.window = window;
    s.move_after_resample = move;
    s.move_sweeps = move_sweeps;
    s.t_star_rule = t_star;
    s.permute = permute;
    return s;
  }

  [[nodiscard]] SmcmcSettings smcmc_settings() const {
    SmcmcSettings s;
    s.iterations = smcmc_iterations;
    s.burn_in = smcmc_burn_in;
    s.batches = batches;
    s.moves = window.moves;
    s.data_driven_birth = window.data_driven_birth;
    s.birth = window.birth;
    return s;
  }

  [[nodiscard]] MultiStreamSettings multi_settings() const {
    MultiStreamSettings s;
    s.smc = smc_settings();
    s.budget.total = budget > 0 ? budget : particles * events.size();
    s.budget.floor = floor;
    s.timing = score_timing;
    s.threads = threads;
    s.seed = seed;
    return s;
  }

  [[nodiscard]] PoissonGammaModel poisson_gamma() const { return {nu, alpha, beta}; }
  [[nodiscard]] ShotNoiseCoxModel shot_noise_cox() const { return {nu, kappa, alpha, merge_shift}; }

 private:
  static std::size_t count(std::string_view v) {
    const double x = parse_number(v);
    if (x < 0.0 || x != std::floor(x) || x > 1e15) throw std::invalid_argument("expected a nonnegative integer");
    return static_cast<std::size_t>(x);
  }

  static bool flag(std::string_view v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("expected true or false");
  }

  static std::vector<std::string> split(std::string_view v) {
    std::vector<std::string> out;
    while (!v.empty()) {
      const auto comma = v.find(',');
      const auto part = detail::trim(v.substr(0, comma));
      if (!part.empty()) out.emplace_back(part);
      if (comma == std::string_view::npos) break;
      v.remove_prefix(comma + 1);
    }
    return out;
  }

  static std::vector<double> numbers(std::string_view v) {
    std::vector<double> out;
    for (const auto& s : split(v)) out.push_back(parse_number(s));
    return out;
  }

  void assign(const std::string& key, const std::string& v) {
    if (key == "model") {
      if (v == "poisson-gamma") model = ModelKind::kPoissonGamma;
      else if (v == "chained-gamma") model = ModelKind::kChainedGamma;
      else if (v == "shot-noise-cox") model = ModelKind::kShotNoiseCox;
      else throw std::invalid_argument("expected poisson-gamma, chained-gamma or shot-noise-cox");
    } else if (key == "nu") nu = parse_number(v);
    else if (key == "alpha") alpha = parse_number(v);
    else if (key == "beta") beta = parse_number(v);
    else if (key == "kappa") kappa = parse_number(v);
    else if (key == "merge_shift") {
      if (v == "shot-preserving") merge_shift = MergeShift::kShotPreserving;
      else if (v == "constant") merge_shift = MergeShift::kConstant;
      else throw std::invalid_argument("expected shot-preserving or constant");
    } else if (key == "chain_alpha") chain.alpha0 = parse_number(v);
    else if (key == "chain_beta") chain.beta0 = parse_number(v);
    else if (key == "chi") chain.chi = parse_number(v);
    else if (key == "updates") updates = count(v);
    else if (key == "spacing") spacing = parse_number(v);
    else if (key == "times") times = numbers(v);
    else if (key == "particles") particles = count(v);
    else if (key == "budget") budget = count(v);
    else if (key == "floor") floor = count(v);
    else if (key == "ess_threshold") ess_threshold = parse_number(v);
    else if (key == "iterations") window.iterations = count(v);
    else if (key == "burn_in") window.burn_in = count(v);
    else if (key == "thin") window.thin = count(v);
    else if (key == "data_driven_birth") window.data_driven_birth = flag(v);
    else if (key == "birth_bin_width") window.birth.bin_width = parse_number(v);
    else if (key == "move") move = flag(v);
    else if (key == "move_sweeps") move_sweeps = count(v);
    else if (key == "t_star") {
      if (v == "posterior-mean") t_star = TStarRule::kPosteriorMean;
      else if (v == "previous-update") t_star = TStarRule::kPreviousUpdate;
      else throw std::invalid_argument("expected posterior-mean or previous-update");
    } else if (key == "permute") permute = flag(v);
    else if (key == "smcmc_iterations") smcmc_iterations = count(v);
    else if (key == "smcmc_burn_in") smcmc_burn_in = count(v);
    else if (key == "batches") batches = count(v);
    else if (key == "score_timing") {
      if (v == "pilot") score_timing = ScoreTiming::kPilot;
      else if (v == "previous-update") score_timing = ScoreTiming::kPreviousUpdate;
      else throw std::invalid_argument("expected pilot or previous-update");
    } else if (key == "threads") threads = count(v);
    else if (key == "seed") seed = count(v);
    else if (key == "output") output = v;
    else if (key == "events") events = split(v);
    else if (key == "strict") strict = flag(v);
    else if (key == "kind") {
      if (v == "piecewise-poisson") kind = StreamKind::kPiecewisePoisson;
      else if (v == "shot-noise-cox") kind = StreamKind::kShotNoiseCox;
      else throw std::invalid_argument("expected piecewise-poisson or shot-noise-cox");
    } else if (key == "horizon") horizon = parse_number(v);
    else if (key == "rates") rates = numbers(v);
    else if (key == "changepoints") changepoints = numbers(v);
  }
};

}  // namespace cpsmc

#endif
