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

#include "dynsim/train/few_shot.h"

#include <random>

namespace dynsim {
namespace {

std::vector<double> ReplayState(const Dataset& replay, Rng& rng) {
  std::size_t total = 0;
  for (const auto& seg : replay.segments) total += seg.steps() + 1;
  std::size_t k = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng);
  for (const auto& seg : replay.segments) {
    if (k <= seg.steps()) {
      auto s = seg.state(k);
      return {s.begin(), s.end()};
    }
    k -= seg.steps() + 1;
  }
  return {};
}

}  // namespace

void FewShotConfig::Validate() const {
  if (update_every < 1) throw ConfigError("update_every must be >= 1");
  if (virtual_per_collect < 1)
    throw ConfigError("virtual_per_collect must be >= 1");
  if (virtual_episode_steps < 1 || real_episode_steps < 1)
    throw ConfigError("episode lengths must be >= 1");
  if (train.segment_length < 1 || train.batch_size < 1)
    throw ConfigError("segment_length and batch_size must be >= 1");
}

FewShotResult FewShotLoop(const FewShotConfig& cfg, const Env& env,
                          const Dataset& pretrain, DynamicsParams& params,
                          Policy& policy) {
  cfg.Validate();
  if (pretrain.segments.empty()) throw ConfigError("empty pretraining data");
  if (!(pretrain.dims == env.spec().dims))
    throw DimensionError("pretraining data does not match env");
  const std::int64_t calls0 = OracleCallCount();
  FewShotResult res;
  res.replay = pretrain;
  FewShotLog& log = res.log;
  Rng rng(MixSeed(cfg.seed, 0x66657773686f74ULL));
  AdamState adam(params.ParamCount(), cfg.train.adam);
  LossOptions loss;
  loss.path = cfg.train.grad_path;
  loss.rollout = cfg.train.rollout;
  loss.adjoint = cfg.train.adjoint;
  const double dt = env.spec().dt;

  auto collect = [&] {
    std::size_t remaining = cfg.real_per_collect;
    while (remaining > 0) {
      const std::size_t n = std::min(remaining, cfg.real_episode_steps);
      std::vector<double> s = env.SampleInitialState(rng);
      TrajectorySegment seg;
      seg.dt = dt;
      seg.state_dim = env.state_dim();
      seg.action_dim = env.action_dim();
      seg.tag = SourceTag::kPolicy;
      seg.states = s;
      policy.Reset();
      for (std::size_t t = 0; t < n; ++t) {
        const std::vector<double> a = env.ClampAction(policy.Act(s));
        const TrajectorySegment step = GenerateTrajectory(env, s, a, 1);
        auto next = step.state(1);
        s.assign(next.begin(), next.end());
        seg.actions.insert(seg.actions.end(), a.begin(), a.end());
        seg.states.insert(seg.states.end(), s.begin(), s.end());
      }
      res.replay.segments.push_back(std::move(seg));
      log.real_steps += n;
      ++log.real_episodes;
      remaining -= n;
    }
  };

  auto update = [&] {
    const std::size_t len = cfg.train.segment_length;
    double total = 0.0;
    for (std::size_t k = 0; k < cfg.grad_steps_per_update; ++k) {
      const auto refs =
          SampleWindows(res.replay, len, cfg.train.batch_size, rng, 0);
      const auto batch = MaterializeWindows(res.replay, refs, len);
      BatchLoss bl = BatchSegmentLoss(params, batch, loss, GradMask::All(),
                                      true, cfg.train.exec);
      AdamStep(adam, params.values, bl.grad);
      total += bl.loss;
    }
    log.update_loss.push_back(total /
                              static_cast<double>(cfg.grad_steps_per_update));
    ++log.updates;
  };

  ModelSystem model(params);
  std::vector<double> s;
  std::size_t episode_t = cfg.virtual_episode_steps;  // forces a reset
  for (std::size_t v = 0; v < cfg.virtual_steps; ++v) {
    if (cfg.collect && v % cfg.virtual_per_collect == 0) collect();
    if (episode_t >= cfg.virtual_episode_steps) {
      s = ReplayState(res.replay, rng);
      policy.Reset();
      episode_t = 0;
      ++log.virtual_resets;
    }
    const std::vector<double> a = env.ClampAction(policy.Act(s));
    try {
      const Rollout r = IntegrateControlled(model, s, a, dt, cfg.train.rollout);
      s = r.states[1];
      ++episode_t;
    } catch (const IntegrationError&) {
      episode_t = cfg.virtual_episode_steps;
    }
    ++log.virtual_steps;
    if (log.virtual_steps % cfg.update_every == 0) update();
  }
  log.oracle_calls = OracleCallCount() - calls0;
  return res;
}

}  // namespace dynsim
