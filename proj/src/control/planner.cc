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

#include "dynsim/control/planner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace dynsim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

RolloutOptions PlannerConfig::DefaultPlannerRollout() {
  RolloutOptions r;
  r.solver = Solver::kRk4;
  r.rk4_substeps = 2;
  return r;
}

std::size_t PlannerConfig::elites() const {
  const auto e = static_cast<std::size_t>(
      std::lround(elite_fraction * static_cast<double>(population)));
  return std::clamp<std::size_t>(e, 1, population);
}

void PlannerConfig::Validate() const {
  if (horizon < 1) throw ConfigError("planner horizon must be >= 1");
  if (population < 1) throw ConfigError("planner population must be >= 1");
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0))
    throw ConfigError("elite_fraction must be in (0, 1]");
  if (iterations < 1) throw ConfigError("planner iterations must be >= 1");
  if (!(smoothing >= 0.0 && smoothing < 1.0))
    throw ConfigError("smoothing must be in [0, 1)");
  if (!(dt > 0)) throw ConfigError("planner dt must be > 0");
}

double SequenceReturn(const ControlledSystem& model, std::span<const double> s0,
                      std::span<const double> actions, double dt,
                      const RewardFn& reward, const RolloutOptions& rollout) {
  const std::size_t da = model.action_dim();
  Rollout r;
  try {
    r = IntegrateControlled(model, s0, actions, dt, rollout);
  } catch (const IntegrationError&) {
    return kNegInf;
  }
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < r.states.size(); ++k)
    total += reward(r.states[k + 1], actions.subspan(k * da, da));
  return std::isfinite(total) ? total : kNegInf;
}

PlanResult CemPlan(const ControlledSystem& model, std::span<const double> s0,
                   const RewardFn& reward, std::span<const double> action_low,
                   std::span<const double> action_high,
                   const PlannerConfig& cfg,
                   std::span<const double> init_mean) {
  cfg.Validate();
  const std::size_t da = model.action_dim(), n = cfg.horizon * da;
  if (action_low.size() != da || action_high.size() != da)
    throw DimensionError("action bounds width");
  if (!init_mean.empty() && init_mean.size() != n)
    throw DimensionError("initial plan size");
  if (s0.size() != model.state_dim()) throw DimensionError("planner state");

  std::vector<double> mean(n, 0.0), stdev(n), half(n), lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = action_low[i % da];
    hi[i] = action_high[i % da];
    half[i] = 0.5 * (hi[i] - lo[i]);
    stdev[i] = half[i];
    if (!init_mean.empty()) mean[i] = init_mean[i];
  }

  const std::size_t pop = cfg.population, n_elite = cfg.elites();
  std::vector<std::vector<double>> cand(pop, std::vector<double>(n));
  std::vector<double> ret(pop, kNegInf);
  std::vector<std::size_t> order(pop);
  std::size_t retained = 0;
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal;
  PlanResult res;

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t c = retained; c < pop; ++c) {
      for (std::size_t i = 0; i < n; ++i)
        cand[c][i] = std::clamp(mean[i] + stdev[i] * normal(rng), lo[i], hi[i]);
    }
    ForEachIndex(cfg.exec, pop - retained, [&](std::size_t j) {
      const std::size_t c = retained + j;
      ret[c] = SequenceReturn(model, s0, cand[c], cfg.dt, reward, cfg.rollout);
    });
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ret[a] > ret[b];
    });
    res.best_elite_return.push_back(ret[order[0]]);
    if (ret[order[0]] == kNegInf) continue;

    std::size_t used = 0;
    std::vector<double> em(n, 0.0), ev(n, 0.0);
    for (std::size_t e = 0; e < n_elite && ret[order[e]] > kNegInf; ++e, ++used)
      for (std::size_t i = 0; i < n; ++i) em[i] += cand[order[e]][i];
    for (double& v : em) v /= static_cast<double>(used);
    for (std::size_t e = 0; e < used; ++e) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d = cand[order[e]][i] - em[i];
        ev[i] += d * d;
      }
    }
    const double a = cfg.smoothing;
    for (std::size_t i = 0; i < n; ++i) {
      const double sd = std::max(std::sqrt(ev[i] / static_cast<double>(used)),
                                 cfg.min_std * half[i]);
      mean[i] = a * mean[i] + (1.0 - a) * em[i];
      stdev[i] = a * stdev[i] + (1.0 - a) * sd;
    }

    if (cfg.retain_elites) {
      // Move the elites to the front, keeping their scores.
      std::vector<std::vector<double>> kept;
      std::vector<double> kept_ret;
      for (std::size_t e = 0; e < used; ++e) {
        kept.push_back(cand[order[e]]);
        kept_ret.push_back(ret[order[e]]);
      }
      for (std::size_t e = 0; e < used; ++e) {
        cand[e] = std::move(kept[e]);
        ret[e] = kept_ret[e];
      }
      retained = used;
    }
  }
  for (std::size_t i = 0; i < n; ++i) mean[i] = std::clamp(mean[i], lo[i], hi[i]);
  res.predicted_return =
      SequenceReturn(model, s0, mean, cfg.dt, reward, cfg.rollout);
  res.actions = std::move(mean);
  return res;
}

MpcController::MpcController(const ControlledSystem& model, RewardFn reward,
                             std::vector<double> action_low,
                             std::vector<double> action_high, PlannerConfig cfg)
    : model_(model),
      reward_(std::move(reward)),
      low_(std::move(action_low)),
      high_(std::move(action_high)),
      cfg_(std::move(cfg)) {
  cfg_.Validate();
}

void MpcController::Reset() {
  mean_.clear();
  calls_ = 0;
}

std::vector<double> MpcController::Act(std::span<const double> s) {
  const std::size_t da = model_.action_dim();
  PlannerConfig c = cfg_;
  c.seed = MixSeed(cfg_.seed, calls_++);
  std::vector<double> init;
  if (!mean_.empty()) {
    init.assign(mean_.begin() + da, mean_.end());
    init.resize(mean_.size(), 0.0);
  }
  PlanResult p = CemPlan(model_, s, reward_, low_, high_, c, init);
  mean_ = std::move(p.actions);
  return {mean_.begin(), mean_.begin() + da};
}

}  // namespace dynsim
