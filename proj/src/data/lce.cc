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

#include "dynsim/data/lce.h"

#include <cmath>
#include <random>

namespace dynsim {

LceResult EstimateLce(const ControlledSystem& sys,
                      const std::function<std::vector<double>(Rng&)>& sample_s0,
                      std::span<const double> action, const LceConfig& cfg) {
  if (!(cfg.delta > 0)) throw ConfigError("LCE delta must be > 0");
  if (cfg.steps == 0 || cfg.n_traj == 0)
    throw ConfigError("LCE needs steps > 0 and n_traj > 0");
  if (action.size() != sys.action_dim()) throw DimensionError("action length");
  const std::size_t n = sys.state_dim();
  std::vector<double> logs(cfg.n_traj, std::nan(""));
  RolloutOptions opts = cfg.rollout;
  opts.record = false;

  ForEachIndex(cfg.exec, cfg.n_traj, [&](std::size_t i) {
    Rng rng(MixSeed(cfg.seed, i));
    std::vector<double> a = sample_s0(rng);
    std::normal_distribution<double> normal;
    std::vector<double> dir(n);
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& v : dir) v = normal(rng);
      for (double v : dir) norm += v * v;
      norm = std::sqrt(norm);
    }
    std::vector<double> b(n);
    for (std::size_t d = 0; d < n; ++d) b[d] = a[d] + cfg.delta * dir[d] / norm;
    double acc = 0.0;
    try {
      for (std::size_t k = 0; k < cfg.steps; ++k) {
        a = IntegrateControlled(sys, a, action, cfg.dt, opts).states.back();
        b = IntegrateControlled(sys, b, action, cfg.dt, opts).states.back();
        double dist = 0.0;
        for (std::size_t d = 0; d < n; ++d) dist += (b[d] - a[d]) * (b[d] - a[d]);
        dist = std::sqrt(dist);
        if (!std::isfinite(dist) || dist == 0.0) return;
        acc += std::log(dist / cfg.delta);
        for (std::size_t d = 0; d < n; ++d)
          b[d] = a[d] + (b[d] - a[d]) * (cfg.delta / dist);
      }
    } catch (const IntegrationError&) {
      return;
    }
    logs[i] = acc / (static_cast<double>(cfg.steps) * cfg.dt);
  });

  LceResult res;
  double sum = 0.0;
  for (double v : logs) {
    if (!std::isfinite(v)) {
      ++res.n_dropped;
      continue;
    }
    res.per_trajectory.push_back(v);
    sum += v;
  }
  res.n_used = res.per_trajectory.size();
  if (res.n_used == 0) {
    res.lambda = std::nan("");
    return res;
  }
  res.lambda = sum / static_cast<double>(res.n_used);
  double var = 0.0;
  for (double v : res.per_trajectory) var += (v - res.lambda) * (v - res.lambda);
  if (res.n_used > 1) var /= static_cast<double>(res.n_used - 1);
  res.std_error = std::sqrt(var / static_cast<double>(res.n_used));
  return res;
}

}  // namespace dynsim
