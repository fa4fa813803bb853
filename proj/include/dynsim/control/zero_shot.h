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

// Zero-shot evaluation: plan every step inside a model, execute the first
// action in the oracle environment, and compare against the same planner
// using the oracle itself as its model.

#ifndef DYNSIM_CONTROL_ZERO_SHOT_H_
#define DYNSIM_CONTROL_ZERO_SHOT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dynsim/control/planner.h"
#include "dynsim/control/task.h"
#include "dynsim/data/dataset.h"
#include "dynsim/envs/env.h"
#include "json.hpp"

namespace dynsim {

struct ZeroShotConfig {
  PlannerConfig planner;
  std::size_t episodes = 3;
  std::size_t episode_steps = 0;  // 0: the task default
  std::uint64_t seed = 0;
  bool oracle_reference = true;
  // Optional reward used for planning only; reported returns always use the
  // task reward.
  RewardFn planning_reward;
};

struct EpisodeRecord {
  std::vector<double> s0;
  std::vector<double> rewards;
  double total = 0.0;
};

struct ZeroShotReport {
  std::string env;
  std::vector<EpisodeRecord> episodes;
  std::vector<EpisodeRecord> oracle_episodes;
  double mean_return = 0.0;
  double oracle_planner_return = 0.0;  // NaN without the reference run
  // Oracle derivative calls made while planning in the model (must be 0 for
  // a learned model).
  std::int64_t planning_oracle_calls = 0;
};

// One control interval of the oracle environment.
std::vector<double> OracleStep(const Env& env, std::span<const double> s,
                               std::span<const double> a);

// Runs the MPC loop for one episode; `model` may be the env itself.
EpisodeRecord RunEpisode(const ControlledSystem& model, const Env& env,
                         const Task& task, const RewardFn& planning_reward,
                         const PlannerConfig& planner, std::vector<double> s0,
                         std::size_t steps, std::int64_t* planning_calls);

ZeroShotReport ZeroShotEval(const ControlledSystem& model, const Env& env,
                            const Task& task, const ZeroShotConfig& cfg);

// Planner-generated ("-p") data: each trajectory starts from the env's
// initial-state box and follows the MPC planner using the oracle as its
// model, with N(0, (action_noise * half range)^2) exploration noise on every
// executed action. Segments are tagged kPolicy.
Dataset GeneratePlannerDataset(const Env& env, const Task& task,
                               const PlannerConfig& planner, std::size_t n_traj,
                               std::size_t steps, std::uint64_t seed,
                               double action_noise, Execution exec);

nlohmann::json ZeroShotReportJson(const ZeroShotReport& r,
                                  const std::string& model_ckpt,
                                  std::uint64_t planner_cfg_hash);

}  // namespace dynsim

#endif  // DYNSIM_CONTROL_ZERO_SHOT_H_
