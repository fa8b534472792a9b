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

// Command line front end: single-stream SMC, the SMCMC reference, budgeted multi-stream
// runs, synthetic streams and SMC-versus-SMCMC comparison reports.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cpsmc/cpsmc.hpp>

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kBadInput = 1, kFailure = 2 };

struct BadInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

cpsmc::EventStream read_stream(const cpsmc::RunConfig& cfg, const std::string& path) {
  if (!fs::is_regular_file(path)) throw BadInput("cannot open event file " + path);
  return cpsmc::load_events(path, cfg.strict);
}

const std::string& single_events(const cpsmc::RunConfig& cfg) {
  if (cfg.events.size() != 1) throw BadInput("exactly one event file is required (--events)");
  return cfg.events.front();
}

std::vector<double> require_grid(const cpsmc::RunConfig& cfg) {
  auto g = cfg.grid();
  if (g.empty()) throw BadInput("no update times (set --updates or --times)");
  return g;
}

fs::path out_dir(const cpsmc::RunConfig& cfg) {
  fs::path dir{cfg.output};
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
  return dir;
}

template <cpsmc::SegmentModel Model, class Summarize>
int run_filter(const cpsmc::RunConfig& cfg, const Model& model, const cpsmc::EventStream& events,
               Summarize summarize) {
  const auto grid = require_grid(cfg);
  const auto dir = out_dir(cfg);
  const auto settings = cfg.smc_settings();
  auto rng = cpsmc::make_stream_rng(cfg.seed, 0, 0);
  auto summary_rng = cpsmc::make_stream_rng(cfg.seed, 0, 2);
  cpsmc::SmcState state;
  std::vector<cpsmc::IntensitySummary> intensity;
  for (double t : grid) {
    cpsmc::smc_update(state, model, events, t, settings, rng);
    intensity.push_back(summarize(state, t, summary_rng));
  }
  const auto curve = cpsmc::unique_particle_curve(state.lineage, state.last_pre_resampling_log_weights, summary_rng);
  cpsmc::write_intensity_csv(dir / "intensity.csv", grid, intensity);
  cpsmc::write_ess_csv(dir / "ess.csv", state.history);
  cpsmc::write_changepoints_csv(dir / "changepoints.csv", state.history);
  cpsmc::write_unique_particles_csv(dir / "unique_particles.csv", curve, grid);

  std::size_t resamples = 0;
  for (const auto& d : state.history) resamples += d.resampled ? 1 : 0;
  std::printf("updates %zu  resampled %zu  final E[k] %.4f  log Z %.6f\n", grid.size(), resamples,
              state.history.back().k_mean, state.log_normalizer);
  return kOk;
}

int cmd_run(const cpsmc::RunConfig& cfg) {
  const auto events = read_stream(cfg, single_events(cfg));
  switch (cfg.model) {
    case cpsmc::ModelKind::kPoissonGamma: {
      const auto model = cfg.poisson_gamma();
      return run_filter(cfg, model, events, [&](const cpsmc::SmcState& s, double t, cpsmc::Rng& r) {
        return cpsmc::summarize_intensity(model, events, s.set, t, r);
      });
    }
    case cpsmc::ModelKind::kChainedGamma: {
      const auto model = cfg.poisson_gamma();
      return run_filter(cfg, model, events, [&](const cpsmc::SmcState& s, double t, cpsmc::Rng& r) {
        return cpsmc::summarize_intensity_chained(events, s.set, t, cfg.alpha, cfg.beta, cfg.chain, r);
      });
    }
    case cpsmc::ModelKind::kShotNoiseCox: {
      const auto model = cfg.shot_noise_cox();
      return run_filter(cfg, model, events, [&](const cpsmc::SmcState& s, double t, cpsmc::Rng& r) {
        return cpsmc::summarize_intensity(model, events, s.set, t, r);
      });
    }
  }
  return kFailure;
}

template <cpsmc::SegmentModel Model>
std::vector<cpsmc::SmcmcUpdate> reference(const cpsmc::RunConfig& cfg, const Model& model,
                                          const cpsmc::EventStream& events, const std::vector<double>& grid) {
  auto rng = cpsmc::make_stream_rng(cfg.seed, 0, 3);
  return cpsmc::smcmc_run(model, events, grid, cfg.smcmc_settings(), rng);
}

std::vector<cpsmc::SmcmcUpdate> reference(const cpsmc::RunConfig& cfg, const cpsmc::EventStream& events,
                                          const std::vector<double>& grid) {
  if (cfg.model == cpsmc::ModelKind::kShotNoiseCox) return reference(cfg, cfg.shot_noise_cox(), events, grid);
  if (cfg.model == cpsmc::ModelKind::kChainedGamma) throw BadInput("the chained-gamma model has no SMCMC reference");
  return reference(cfg, cfg.poisson_gamma(), events, grid);
}

int cmd_smcmc(const cpsmc::RunConfig& cfg) {
  const auto events = read_stream(cfg, single_events(cfg));
  const auto grid = require_grid(cfg);
  const auto dir = out_dir(cfg);
  const auto updates = reference(cfg, events, grid);
  std::vector<cpsmc::IntensitySummary> intensity;
  for (const auto& u : updates) intensity.push_back(u.intensity);
  cpsmc::write_smcmc_csv(dir / "smcmc.csv", updates);
  cpsmc::write_intensity_csv(dir / "intensity.csv", grid, intensity);
  std::printf("updates %zu  final E[k] %.4f (se %.4f)\n", updates.size(), updates.back().k_mean, updates.back().k_se);
  return kOk;
}

int cmd_compare(const cpsmc::RunConfig& cfg) {
  const auto events = read_stream(cfg, single_events(cfg));
  const auto grid = require_grid(cfg);
  const auto dir = out_dir(cfg);
  const auto settings = cfg.smc_settings();
  auto rng = cpsmc::make_stream_rng(cfg.seed, 0, 0);
  auto summary_rng = cpsmc::make_stream_rng(cfg.seed, 0, 2);
  std::vector<double> smc_mean;
  auto filter = [&](const auto& model) {
    cpsmc::SmcState state;
    for (double t : grid) {
      cpsmc::smc_update(state, model, events, t, settings, rng);
      smc_mean.push_back(cpsmc::summarize_intensity(model, events, state.set, t, summary_rng).mean);
    }
  };
  if (cfg.model == cpsmc::ModelKind::kShotNoiseCox) {
    filter(cfg.shot_noise_cox());
  } else {
    filter(cfg.poisson_gamma());
  }
  const auto ref = reference(cfg, events, grid);

  cpsmc::CsvWriter csv{dir / "compare.csv", {"update", "time", "smc_mean", "smcmc_mean", "smcmc_se", "z", "inside"}};
  std::size_t inside = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = (smc_mean[i] - ref[i].intensity.mean) / ref[i].intensity_se;
    const bool ok = std::abs(z) <= 3.0;
    inside += ok ? 1 : 0;
    csv.row(i + 1, grid[i], smc_mean[i], ref[i].intensity.mean, ref[i].intensity_se, z, ok);
  }
  std::printf("SMC mean inside the SMCMC 3-s.e. band at %zu of %zu update times\n", inside, grid.size());
  return kOk;
}

int cmd_multi(const cpsmc::RunConfig& cfg) {
  if (cfg.events.empty()) throw BadInput("at least one event file is required (--events a,b,...)");
  std::vector<cpsmc::EventStream> streams;
  for (const auto& path : cfg.events) streams.push_back(read_stream(cfg, path));
  const auto grid = require_grid(cfg);
  const auto dir = out_dir(cfg);
  const auto settings = cfg.multi_settings();
  try {
    settings.budget.validate(streams.size());
  } catch (const std::invalid_argument& e) {
    throw BadInput(e.what());
  }
  cpsmc::MultiStreamResult result;
  if (cfg.model == cpsmc::ModelKind::kShotNoiseCox) {
    const std::vector<cpsmc::ShotNoiseCoxModel> models{cfg.shot_noise_cox()};
    result = cpsmc::run_parallel<cpsmc::ShotNoiseCoxModel>(streams, models, grid, settings);
  } else {
    const std::vector<cpsmc::PoissonGammaModel> models{cfg.poisson_gamma()};
    result = cpsmc::run_parallel<cpsmc::PoissonGammaModel>(streams, models, grid, settings);
  }
  cpsmc::write_allocations_csv(dir / "allocations.csv", result.allocations);
  cpsmc::CsvWriter csv{dir / "streams.csv", {"update", "stream", "time", "ess", "particles", "resampled", "k_mean"}};
  for (std::size_t u = 0; u < grid.size(); ++u) {
    for (std::size_t j = 0; j < streams.size(); ++j) {
      const auto& d = result.states[j].history[u];
      csv.row(d.update, j, d.time, d.ess, d.particles, d.resampled, d.k_mean);
    }
  }
  std::printf("streams %zu  updates %zu  budget %zu per update\n", streams.size(), grid.size(), settings.budget.total);
  return kOk;
}

int cmd_simulate(const cpsmc::RunConfig& cfg) {
  const auto dir = out_dir(cfg);
  auto rng = cpsmc::make_stream_rng(cfg.seed, 0, 0);
  cpsmc::SimulatedStream sim;
  if (cfg.kind == cpsmc::StreamKind::kShotNoiseCox) {
    sim = cpsmc::simulate_shot_noise_cox(cfg.nu, cfg.kappa, cfg.alpha, cfg.horizon, rng);
  } else {
    try {
      sim = cpsmc::simulate_piecewise_poisson({cfg.changepoints, cfg.rates}, cfg.horizon, rng);
    } catch (const std::invalid_argument& e) {
      throw BadInput(e.what());
    }
  }
  const fs::path events_path = cfg.events.empty() ? dir / "events.txt" : fs::path{cfg.events.front()};
  cpsmc::write_events(events_path, sim.events);
  cpsmc::CsvWriter csv{dir / "truth.csv", {"segment", "start", "level"}};
  for (std::size_t i = 0; i < sim.levels.size(); ++i) {
    csv.row(i, i == 0 ? 0.0 : sim.changepoints[i - 1], sim.levels[i]);
  }
  std::printf("%zu events, %zu changepoints -> %s\n", sim.events.size(), sim.changepoints.size(),
              events_path.string().c_str());
  return kOk;
}

std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  for (auto& ch : f) {
    if (ch == '_') ch = '-';
  }
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming changepoint detection with sequential Monte Carlo"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("-c,--config", config_path, "key = value settings file; flags override it");
  std::map<std::string, std::string> flags;
  for (const auto& key : cpsmc::RunConfig::keys()) app.add_option(flag_name(key), flags[key]);

  auto* run = app.add_subcommand("run", "single-stream SMC filter");
  auto* smcmc = app.add_subcommand("smcmc", "full-history RJMCMC reference at each update");
  auto* multi = app.add_subcommand("multi", "several streams under a shared particle budget");
  auto* simulate = app.add_subcommand("simulate", "write a synthetic event stream");
  auto* compare = app.add_subcommand("compare", "SMC against the SMCMC reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) {
      std::ifstream in{config_path};
      if (!in) throw BadInput("cannot open config file " + config_path);
      kv = cpsmc::parse_key_values(in);
    }
    for (const auto& [key, value] : flags) {
      if (app.count(flag_name(key)) > 0) kv[key] = value;
    }
    const auto cfg = cpsmc::RunConfig::from_map(kv);
    if (run->parsed()) return cmd_run(cfg);
    if (smcmc->parsed()) return cmd_smcmc(cfg);
    if (multi->parsed()) return cmd_multi(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (compare->parsed()) return cmd_compare(cfg);
  } catch (const cpsmc::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
