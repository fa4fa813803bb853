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

// Largest Lyapunov characteristic exponent by the two-trajectory method with
// renormalization after every control step.

#ifndef DYNSIM_DATA_LCE_H_
#define DYNSIM_DATA_LCE_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "dynsim/common.h"
#include "dynsim/ode/rollout.h"
#include "dynsim/parallel/execution.h"

namespace dynsim {

struct LceConfig {
  double delta = 1e-5;
  std::size_t steps = 1000;  // T control steps
  std::size_t n_traj = 2000;
  double dt = 0.05;
  std::uint64_t seed = 0;
  RolloutOptions rollout;
  Execution exec = Execution::kParallel;
};

struct LceResult {
  double lambda = 0.0;     // mean over surviving trajectories, 1/s
  double std_error = 0.0;  // std / sqrt(n_used)
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;  // non-finite or failed integrations
  std::vector<double> per_trajectory;
};

// Trajectory i draws its initial state from sample_s0(rng) and its
// perturbation direction from the same Rng(MixSeed(seed, i)). Actions are
// held at `action` (zero torque for the free system).
LceResult EstimateLce(const ControlledSystem& sys,
                      const std::function<std::vector<double>(Rng&)>& sample_s0,
                      std::span<const double> action, const LceConfig& cfg);

}  // namespace dynsim

#endif  // DYNSIM_DATA_LCE_H_
