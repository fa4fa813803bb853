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

// Serial reference loops vs OpenMP work sharing for the batch kernels.
// Argument 0 selects the serial path, 1 the parallel one.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "dynsim/control/planner.h"
#include "dynsim/control/task.h"
#include "dynsim/data/benchmark.h"
#include "dynsim/data/dataset.h"
#include "dynsim/data/lce.h"
#include "dynsim/dynamics/model.h"
#include "dynsim/envs/env.h"
#include "dynsim/ode/rollout.h"
#include "dynsim/train/trainer.h"

namespace dynsim {
namespace {

Execution Mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

struct Fixture {
  std::unique_ptr<Env> env = MakeEnv("pendulum");
  Dataset data = GenerateDataset(*env, {}, 32, 200, 0);
  DynamicsParams params = [this] {
    Rng rng(0);
    DynamicsParams p = InitDynamicsParams(
        MakeStructuredArchitecture(env->spec().dims, ModelSize::Desk(),
                                   env->spec().periodic),
        rng);
    p.norm = FitNormalization(p.arch, data);
    return p;
  }();
};

const Fixture& Shared() {
  static const Fixture f;
  return f;
}

void BM_BatchSegmentLoss(benchmark::State& state) {
  const Fixture& f = Shared();
  Rng rng(1);
  const auto refs = SampleWindows(f.data, 16, 16, rng);
  const auto batch = MaterializeWindows(f.data, refs, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        BatchSegmentLoss(f.params, batch, {}, {}, true, Mode(state)));
  }
}
BENCHMARK(BM_BatchSegmentLoss)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RolloutMse(benchmark::State& state) {
  const Fixture& f = Shared();
  const ModelSystem sys(f.params);
  BenchmarkOptions opts;
  opts.n_eval = 32;
  opts.exec = Mode(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(BenchmarkDataset(sys, f.data, opts));
  }
}
BENCHMARK(BM_RolloutMse)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CemPlan(benchmark::State& state) {
  const Fixture& f = Shared();
  const ModelSystem sys(f.params);
  const Task task = MakeTask("pendulum");
  PlannerConfig cfg;
  cfg.exec = Mode(state);
  const std::vector<double> s0 = {0.1, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(CemPlan(sys, s0, task.reward,
                                     f.env->spec().action_low,
                                     f.env->spec().action_high, cfg));
  }
}
BENCHMARK(BM_CemPlan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EstimateLce(benchmark::State& state) {
  const Fixture& f = Shared();
  const ModelSystem sys(f.params);
  LceConfig cfg;
  cfg.steps = 50;
  cfg.n_traj = 32;
  cfg.rollout.solver = Solver::kRk4;
  cfg.rollout.rk4_substeps = 4;
  cfg.exec = Mode(state);
  const Env& env = *f.env;
  const std::vector<double> zero = {0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(EstimateLce(
        sys, [&env](Rng& rng) { return env.SampleInitialState(rng); }, zero,
        cfg));
  }
}
BENCHMARK(BM_EstimateLce)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dynsim

BENCHMARK_MAIN();
