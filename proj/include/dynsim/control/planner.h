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

// Cross-entropy-method model-predictive control over open-loop action
// sequences, rolled out in any controlled system (learned or oracle).

#ifndef DYNSIM_CONTROL_PLANNER_H_
#define DYNSIM_CONTROL_PLANNER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dynsim/control/task.h"
#include "dynsim/ode/rollout.h"
#include "dynsim/parallel/execution.h"
#include "dynsim/train/few_shot.h"

namespace dynsim {

struct PlannerConfig {
  std::size_t horizon = 25;
  std::size_t population = 64;
  double elite_fraction = 0.125;
  std::size_t iterations = 4;
  // mean <- smoothing * mean + (1 - smoothing) * elite mean.
  double smoothing = 0.1;
  double min_std = 0.0;        // fraction of the half action range
  bool retain_elites = true;   // carry elites into the next population
  std::uint64_t seed = 0;
  double dt = 0.05;  // control interval
  RolloutOptions rollout = DefaultPlannerRollout();
  Execution exec = Execution::kParallel;

  std::size_t elites() const;
  void Validate() const;
  static RolloutOptions DefaultPlannerRollout();  // RK4, 2 substeps
};

struct PlanResult {
  std::vector<double> actions;  // horizon x action_dim, the final mean
  double predicted_return = 0.0;
  std::vector<double> best_elite_return;  // per iteration
};

// init_mean (horizon x action_dim) replaces the zero initial mean when given.
// Candidates whose rollout fails or produces non-finite rewards score -inf.
PlanResult CemPlan(const ControlledSystem& model, std::span<const double> s0,
                   const RewardFn& reward, std::span<const double> action_low,
                   std::span<const double> action_high,
                   const PlannerConfig& cfg,
                   std::span<const double> init_mean = {});

// Sum of rewards along the rollout of `actions` from s0; -inf on failure.
double SequenceReturn(const ControlledSystem& model, std::span<const double> s0,
                      std::span<const double> actions, double dt,
                      const RewardFn& reward, const RolloutOptions& rollout);

// Receding-horizon controller: plans from each state, warm-starting from the
// previous plan shifted by one step.
class MpcController : public Policy {
 public:
  MpcController(const ControlledSystem& model, RewardFn reward,
                std::vector<double> action_low, std::vector<double> action_high,
                PlannerConfig cfg);

  std::vector<double> Act(std::span<const double> s) override;
  void Reset() override;

 private:
  const ControlledSystem& model_;
  RewardFn reward_;
  std::vector<double> low_, high_;
  PlannerConfig cfg_;
  std::vector<double> mean_;
  std::uint64_t calls_ = 0;
};

}  // namespace dynsim

#endif  // DYNSIM_CONTROL_PLANNER_H_
