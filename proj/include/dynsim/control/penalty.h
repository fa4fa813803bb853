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

// Density penalty that discourages plans from leaving the region covered by
// the model's training data:
//   R' = R + sigmoid((log p(s) - tau) / alpha) - 1.

#ifndef DYNSIM_CONTROL_PENALTY_H_
#define DYNSIM_CONTROL_PENALTY_H_

#include <span>

#include "dynsim/control/flow.h"
#include "dynsim/control/task.h"

namespace dynsim {

struct PenaltyConfig {
  double tau = 0.0;    // inflection, log-density units
  double alpha = 1.0;  // > 0

  void Validate() const;
};

// In (-1, 0) in exact arithmetic; saturates to -1 or -0 in floating point
// once |log_p - tau| / alpha exceeds about 37.
double DensityPenalty(double log_p, const PenaltyConfig& cfg);

double PenalizedReward(double r_orig, double log_p, const PenaltyConfig& cfg);

// tau = 10th percentile of the flow log-density over `states`, alpha = the
// standard deviation of those log-densities.
PenaltyConfig DefaultPenaltyConfig(const FlowParams& flow,
                                   std::span<const double> states);

// The returned reward keeps its own copy of the flow.
RewardFn PenalizeReward(RewardFn base, const FlowParams& flow,
                        PenaltyConfig cfg);

}  // namespace dynsim

#endif  // DYNSIM_CONTROL_PENALTY_H_
