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

#include "dynsim/control/zero_shot.h"

#include <cmath>
#include <random>

namespace dynsim {
namespace {

std::vector<double> SampleBox(const std::vector<double>& lo,
                              const std::vector<double>& hi, Rng& rng) {
  std::vector<double> s(lo.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
  return s;
}

nlohmann::json EpisodesJson(const std::vector<EpisodeRecord>& eps) {
  nlohmann::json out = nlohmann::json::array();
  for (const EpisodeRecord& e : eps) {
    out.push_back({{"s0", e.s0},
                   {"length", e.rewards.size()},
                   {"return", e.total},
                   {"rewards", e.rewards}});
  }
  return out;
}

double MeanReturn(const std::vector<EpisodeRecord>& eps) {
  if (eps.empty()) return std::nan("");
  double s = 0.0;
  for (const EpisodeRecord& e : eps) s += e.total;
  return s / static_cast<double>(eps.size());
}

}  // namespace

std::vector<double> OracleStep(const Env& env, std::span<const double> s,
                               std::span<const double> a) {
  const TrajectorySegment seg = GenerateTrajectory(env, s, a, 1);
  auto next = seg.state(1);
  return {next.begin(), next.end()};
}

EpisodeRecord RunEpisode(const ControlledSystem& model, const Env& env,
                         const Task& task, const RewardFn& planning_reward,
                         const PlannerConfig& planner, std::vector<double> s0,
                         std::size_t steps, std::int64_t* planning_calls) {
  MpcController mpc(model, planning_reward ? planning_reward : task.reward,
                    env.spec().action_low, env.spec().action_high, planner);
  EpisodeRecord ep;
  ep.s0 = s0;
  std::vector<double> s = std::move(s0);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::int64_t before = OracleCallCount();
    const std::vector<double> a = mpc.Act(s);
    if (planning_calls) *planning_calls += OracleCallCount() - before;
    s = OracleStep(env, s, a);
    const double r = task.reward(s, a);
    ep.rewards.push_back(r);
    ep.total += r;
  }
  return ep;
}

ZeroShotReport ZeroShotEval(const ControlledSystem& model, const Env& env,
                            const Task& task, const ZeroShotConfig& cfg) {
  if (model.state_dim() != env.state_dim() ||
      model.action_dim() != env.action_dim()) {
    throw DimensionError("model and env spaces differ");
  }
  const std::size_t steps =
      cfg.episode_steps ? cfg.episode_steps : task.episode_steps;
  ZeroShotReport rep;
  rep.env = env.spec().name;
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    Rng rng(MixSeed(cfg.seed, e));
    const std::vector<double> s0 = SampleBox(task.init_low, task.init_high, rng);
    PlannerConfig pc = cfg.planner;
    pc.seed = MixSeed(cfg.planner.seed, e);
    rep.episodes.push_back(RunEpisode(model, env, task, cfg.planning_reward, pc,
                                      s0, steps, &rep.planning_oracle_calls));
    if (cfg.oracle_reference) {
      rep.oracle_episodes.push_back(
          RunEpisode(env, env, task, cfg.planning_reward, pc, s0, steps, nullptr));
    }
  }
  rep.mean_return = MeanReturn(rep.episodes);
  rep.oracle_planner_return = MeanReturn(rep.oracle_episodes);
  return rep;
}

Dataset GeneratePlannerDataset(const Env& env, const Task& task,
                               const PlannerConfig& planner, std::size_t n_traj,
                               std::size_t steps, std::uint64_t seed,
                               double action_noise, Execution exec) {
  const EnvSpec& spec = env.spec();
  Dataset d;
  d.env = spec.name;
  d.dims = spec.dims;
  d.dt = spec.dt;
  d.segments.resize(n_traj);
  ForEachIndex(exec, n_traj, [&](std::size_t i) {
    Rng rng(MixSeed(seed, i));
    std::vector<double> s = env.SampleInitialState(rng);
    PlannerConfig pc = planner;
    pc.seed = MixSeed(planner.seed ^ seed, i);
    pc.exec = Execution::kSerial;  // trajectories already run in parallel
    MpcController mpc(env, task.reward, spec.action_low, spec.action_high, pc);
    std::vector<double> actions;
    actions.reserve(steps * spec.dims.da);
    std::normal_distribution<double> noise;
    TrajectorySegment seg;
    seg.dt = spec.dt;
    seg.state_dim = spec.dims.state();
    seg.action_dim = spec.dims.da;
    seg.tag = SourceTag::kPolicy;
    seg.states = s;
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<double> a = mpc.Act(s);
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double half = 0.5 * (spec.action_high[j] - spec.action_low[j]);
        a[j] += action_noise * half * noise(rng);
      }
      a = env.ClampAction(a);
      s = OracleStep(env, s, a);
      seg.actions.insert(seg.actions.end(), a.begin(), a.end());
      seg.states.insert(seg.states.end(), s.begin(), s.end());
    }
    d.segments[i] = std::move(seg);
  });
  return d;
}

nlohmann::json ZeroShotReportJson(const ZeroShotReport& r,
                                  const std::string& model_ckpt,
                                  std::uint64_t planner_cfg_hash) {
  auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return {{"env", r.env},
          {"model_ckpt", model_ckpt},
          {"planner_cfg_hash", HexHash(planner_cfg_hash)},
          {"mean_return", num(r.mean_return)},
          {"oracle_planner_return", num(r.oracle_planner_return)},
          {"planning_oracle_calls", r.planning_oracle_calls},
          {"episodes", EpisodesJson(r.episodes)},
          {"oracle_episodes", EpisodesJson(r.oracle_episodes)}};
}

}  // namespace dynsim
