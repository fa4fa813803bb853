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

#include "dynsim/control/task.h"

#include <cmath>

#include "dynsim/common.h"

namespace dynsim {

Task MakeTask(const std::string& env) {
  Task t;
  t.env = env;
  if (env == "pendulum" || env == "wallpendulum") {
    t.reward = [](std::span<const double> s, std::span<const double>) {
      return 0.5 * (1.0 - std::cos(s[0]));
    };
    t.init_low = {-0.1, -0.1};
    t.init_high = {0.1, 0.1};
  } else if (env == "cartpole") {
    t.reward = [](std::span<const double> s, std::span<const double>) {
      return 0.5 * (1.0 + std::cos(s[1])) - 0.01 * s[0] * s[0];
    };
    t.init_low = {-0.1, -0.2, -0.1, -0.1};
    t.init_high = {0.1, 0.2, 0.1, 0.1};
  } else if (env == "reacher2") {
    t.reward = [](std::span<const double> s, std::span<const double>) {
      constexpr double l = 0.5;
      const double x = l * (std::cos(s[0]) + std::cos(s[0] + s[1]));
      const double y = l * (std::sin(s[0]) + std::sin(s[0] + s[1]));
      return -std::hypot(x - kReacherTargetX, y - kReacherTargetY);
    };
    t.init_low = {-3.0, -3.0, -0.1, -0.1};
    t.init_high = {3.0, 3.0, 0.1, 0.1};
    t.episode_steps = 100;
  } else if (env == "acrobot") {
    t.reward = [](std::span<const double> s, std::span<const double>) {
      return -std::cos(s[0]) - std::cos(s[0] + s[1]);
    };
    t.init_low = {-0.1, -0.1, -0.1, -0.1};
    t.init_high = {0.1, 0.1, 0.1, 0.1};
  } else {
    throw ConfigError("no task defined for env '" + env + "'");
  }
  return t;
}

}  // namespace dynsim
