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

#include "dynsim/control/penalty.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

namespace dynsim {

void PenaltyConfig::Validate() const {
  if (!(alpha > 0.0)) throw ConfigError("penalty alpha must be > 0");
  if (!std::isfinite(tau)) throw ConfigError("penalty tau must be finite");
}

double DensityPenalty(double log_p, const PenaltyConfig& cfg) {
  // sigmoid(x) - 1 = -1 / (1 + exp(x)).
  return -1.0 / (1.0 + std::exp((log_p - cfg.tau) / cfg.alpha));
}

double PenalizedReward(double r_orig, double log_p, const PenaltyConfig& cfg) {
  return r_orig + DensityPenalty(log_p, cfg);
}

PenaltyConfig DefaultPenaltyConfig(const FlowParams& flow,
                                   std::span<const double> states) {
  const std::size_t d = flow.dim, n = d ? states.size() / d : 0;
  if (n == 0) throw ConfigError("penalty calibration needs states");
  std::vector<double> lp(n);
  for (std::size_t i = 0; i < n; ++i)
    lp[i] = FlowLogDensity(flow, states.subspan(i * d, d));
  double mean = 0.0;
  for (double v : lp) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : lp) var += (v - mean) * (v - mean);
  std::sort(lp.begin(), lp.end());
  PenaltyConfig cfg;
  cfg.tau = lp[static_cast<std::size_t>(0.1 * static_cast<double>(n - 1))];
  cfg.alpha = std::sqrt(var / static_cast<double>(n));
  if (!(cfg.alpha > 0)) cfg.alpha = 1.0;
  return cfg;
}

RewardFn PenalizeReward(RewardFn base, const FlowParams& flow,
                        PenaltyConfig cfg) {
  cfg.Validate();
  auto owned = std::make_shared<const FlowParams>(flow);
  return [base = std::move(base), owned, cfg](std::span<const double> s,
                                              std::span<const double> a) {
    double lp;
    try {
      lp = FlowLogDensity(*owned, s);
    } catch (const DensityFault&) {
      return base(s, a) - 1.0;
    }
    return PenalizedReward(base(s, a), lp, cfg);
  };
}

}  // namespace dynsim
