// Copyright 2026 The dynsim Authors.
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

// Rollout-MSE benchmark: integrate a model from each window's first state
// under the recorded actions and compare with the recorded states.

#ifndef DYNSIM_DATA_BENCHMARK_H_
#define DYNSIM_DATA_BENCHMARK_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dynsim/data/dataset.h"
#include "dynsim/ode/rollout.h"
#include "dynsim/parallel/execution.h"
#include "json.hpp"

namespace dynsim {

struct HorizonScore {
  std::size_t horizon = 0;
  double mse = 0.0;             // raw state units
  double mse_normalized = 0.0;  // per-dimension std-normalized
};

struct BenchmarkResult {
  std::vector<HorizonScore> scores;
  // Mean squared error at step k + 1 over surviving windows and dimensions.
  std::vector<double> step_mse, step_mse_normalized;
  std::size_t n_segments = 0;  // windows scored
  std::size_t n_failed = 0;    // windows whose rollout failed
};

// Every window must have at least max(horizons) steps. state_std
// normalizes the second score (pass ones for raw values).
BenchmarkResult RolloutMse(const ControlledSystem& model,
                           const std::vector<TrajectorySegment>& windows,
                           std::span<const double> state_std,
                           const std::vector<std::size_t>& horizons,
                           const RolloutOptions& rollout,
                           Execution exec = Execution::kParallel);

struct BenchmarkOptions {
  std::vector<std::size_t> horizons = {3, 16, 100};
  std::size_t n_eval = 64;
  std::uint64_t seed = 0;
  std::size_t warm_in = kWarmInSteps;
  RolloutOptions rollout;
  Execution exec = Execution::kParallel;
};

// Samples n_eval windows of the longest horizon (seeded) and scores them.
// The normalization uses the dataset's own per-dimension state std.
BenchmarkResult BenchmarkDataset(const ControlledSystem& model,
                                 const Dataset& data,
                                 const BenchmarkOptions& opts);

// One flat record per horizon:
//   {env, model, horizon, mse, mse_normalized, n_segments, n_failed,
//    config_hash}
nlohmann::json BenchmarkReportJson(const BenchmarkResult& r,
                                   const std::string& env,
                                   const std::string& model,
                                   std::uint64_t config_hash);

}  // namespace dynsim

#endif  // DYNSIM_DATA_BENCHMARK_H_
