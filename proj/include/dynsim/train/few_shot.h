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

// Few-shot adaptation: virtual interaction inside the learned model,
// interleaved with small batches of real (oracle) data.
//
// Every `virtual_per_collect` virtual steps the policy gathers
// `real_per_collect` steps in the real environment; every `update_every`
// virtual steps the model takes `grad_steps_per_update` optimizer steps on
// windows drawn from the replay buffer (pretraining data plus everything
// collected). Virtual episodes restart from states drawn from the replay
// buffer.

#ifndef DYNSIM_TRAIN_FEW_SHOT_H_
#define DYNSIM_TRAIN_FEW_SHOT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dynsim/envs/env.h"
#include "dynsim/train/trainer.h"

namespace dynsim {

// Acts on states of the model being adapted. Implementations plan against a
// model that views the same DynamicsParams the loop updates in place.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void Reset() = 0;
  virtual std::vector<double> Act(std::span<const double> s) = 0;
};

struct FewShotConfig {
  std::size_t virtual_steps = 20000;
  std::size_t virtual_per_collect = 5000;
  std::size_t real_per_collect = 1000;
  std::size_t update_every = 100;
  std::size_t grad_steps_per_update = 4;
  std::size_t virtual_episode_steps = 200;
  std::size_t real_episode_steps = 200;
  bool collect = true;
  TrainConfig train;  // segment_length, batch_size, adam, grad path, rollout
  std::uint64_t seed = 0;

  void Validate() const;
};

struct FewShotLog {
  std::size_t virtual_steps = 0;
  std::size_t real_steps = 0;
  std::size_t updates = 0;
  std::size_t virtual_resets = 0;
  std::size_t real_episodes = 0;
  std::vector<double> update_loss;  // mean batch loss per update
  std::int64_t oracle_calls = 0;    // during the loop
};

struct FewShotResult {
  Dataset replay;
  FewShotLog log;
};

// Updates `params` in place.
FewShotResult FewShotLoop(const FewShotConfig& cfg, const Env& env,
                          const Dataset& pretrain, DynamicsParams& params,
                          Policy& policy);

}  // namespace dynsim

#endif  // DYNSIM_TRAIN_FEW_SHOT_H_
