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

// Fixed-dt trajectory segments: states at control boundaries and the
// zero-order-hold action applied over each interval.

#ifndef DYNSIM_DATA_SEGMENT_H_
#define DYNSIM_DATA_SEGMENT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dynsim {

enum class SourceTag : std::uint8_t { kRandom = 0, kPolicy = 1 };

const char* SourceTagName(SourceTag t);

struct TrajectorySegment {
  double dt = 0.0;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> states;   // (steps + 1) x state_dim
  std::vector<double> actions;  // steps x action_dim
  SourceTag tag = SourceTag::kRandom;

  std::size_t steps() const {
    return action_dim == 0 ? 0 : actions.size() / action_dim;
  }
  std::span<const double> state(std::size_t k) const {
    return std::span<const double>(states).subspan(k * state_dim, state_dim);
  }
  std::span<double> state(std::size_t k) {
    return std::span<double>(states).subspan(k * state_dim, state_dim);
  }
  std::span<const double> action(std::size_t k) const {
    return std::span<const double>(actions).subspan(k * action_dim, action_dim);
  }
  // Actions for intervals [first, first + n).
  std::span<const double> action_block(std::size_t first, std::size_t n) const {
    return std::span<const double>(actions).subspan(first * action_dim,
                                                    n * action_dim);
  }

  // Sub-segment of n steps starting at step `first`.
  TrajectorySegment Window(std::size_t first, std::size_t n) const;
  // Throws DimensionError on inconsistent row counts, Error on non-finite data.
  void Validate() const;

  bool operator==(const TrajectorySegment&) const = default;
};

}  // namespace dynsim

#endif  // DYNSIM_DATA_SEGMENT_H_
