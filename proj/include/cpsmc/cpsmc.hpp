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

#ifndef CPSMC_CPSMC_HPP
#define CPSMC_CPSMC_HPP

#include <cpsmc/configuration.hpp>
#include <cpsmc/errors.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/io.hpp>
#include <cpsmc/models/chained_gamma.hpp>
#include <cpsmc/models/constant_likelihood.hpp>
#include <cpsmc/models/poisson_gamma.hpp>
#include <cpsmc/models/segment_model.hpp>
#include <cpsmc/models/shot_noise_cox.hpp>
#include <cpsmc/multistream.hpp>
#include <cpsmc/particles.hpp>
#include <cpsmc/random.hpp>
#include <cpsmc/rjmcmc.hpp>
#include <cpsmc/run_config.hpp>
#include <cpsmc/simulate.hpp>
#include <cpsmc/smc.hpp>
#include <cpsmc/smcmc.hpp>
#include <cpsmc/summary.hpp>
#include <cpsmc/truncated_gamma.hpp>

#endif
