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

// Per-environment task definitions for planning: a reward on the state
// reached after each control interval plus the episode start distribution.
//
//   pendulum, wallpendulum  swing-up, r = (1 - cos theta) / 2 in [0, 1];
//                           episodes start hanging near theta = 0.
//   cartpole                balance, r = (1 + cos theta) / 2 - 0.01 x^2;
//                           episodes start near upright.
//   reacher2                r = -|tip - target|, target (0.5, 0.5) m.
//   acrobot                 swing-up, r = tip height over the pivot, in
//                           link lengths (-2 hanging, +2 inverted).

#ifndef DYNSIM_CONTROL_TASK_H_
#define DYNSIM_CONTROL_TASK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dynsim {

using RewardFn = std::function<double(std::span<const double> s_next,
                                      std::span<const double> a)>;

struct Task {
  std::string env;
  RewardFn reward;
  std::vector<double> init_low, init_high;
  std::size_t episode_steps = 200;
};

Task MakeTask(const std::string& env);

// Reacher target in metres.
inline constexpr double kReacherTargetX = 0.5;
inline constexpr double kReacherTargetY = 0.5;

}  // namespace dynsim

#endif  // DYNSIM_CONTROL_TASK_H_
