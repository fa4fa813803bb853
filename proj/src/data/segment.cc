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

#include "dynsim/data/segment.h"

#include <string>

#include "dynsim/common.h"

namespace dynsim {

const char* SourceTagName(SourceTag t) {
  return t == SourceTag::kPolicy ? "policy" : "random";
}

TrajectorySegment TrajectorySegment::Window(std::size_t first,
                                            std::size_t n) const {
  if (first + n > steps()) {
    throw DimensionError("window [" + std::to_string(first) + ", " +
                         std::to_string(first + n) + ") exceeds " +
                         std::to_string(steps()) + " steps");
  }
  TrajectorySegment w;
  w.dt = dt;
  w.state_dim = state_dim;
  w.action_dim = action_dim;
  w.tag = tag;
  w.states.assign(states.begin() + first * state_dim,
                  states.begin() + (first + n + 1) * state_dim);
  w.actions.assign(actions.begin() + first * action_dim,
                   actions.begin() + (first + n) * action_dim);
  return w;
}

void TrajectorySegment::Validate() const {
  if (state_dim == 0 || action_dim == 0)
    throw DimensionError("segment has zero state or action width");
  if (actions.size() % action_dim != 0)
    throw DimensionError("action array is not a whole number of rows");
  if (states.size() != (steps() + 1) * state_dim)
    throw DimensionError("segment state rows != steps + 1");
  if (!AllFinite(states) || !AllFinite(actions))
    throw Error("segment contains non-finite values");
}

}  // namespace dynsim
