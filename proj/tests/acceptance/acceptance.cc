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

// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Arguments select criteria by number
// (default: all). Exit status is nonzero when any selected criterion fails.
//
// Trained models are shared between criteria (the pendulum models of 3 feed
// 4, 8 and 9; the clean reacher2 model of 4 feeds 6), so running a single
// criterion also trains what it depends on.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dynsim/common.h"
#include "dynsim/control/flow.h"
#include "dynsim/control/penalty.h"
#include "dynsim/control/planner.h"
#include "dynsim/control/task.h"
#include "dynsim/control/zero_shot.h"
#include "dynsim/data/benchmark.h"
#include "dynsim/data/dataset.h"
#include "dynsim/data/lce.h"
#include "dynsim/dynamics/model.h"
#include "dynsim/envs/env.h"
#include "dynsim/io/binary.h"
#include "dynsim/io/json_schema.h"
#include "dynsim/nn/checkpoint.h"
#include "dynsim/ode/integrator.h"
#include "dynsim/ode/rollout.h"
#include "dynsim/train/trainer.h"
#include "json.hpp"

namespace dynsim {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

void Progress(const char* fmt, const std::string& what, double value) {
  std::fprintf(stderr, fmt, what.c_str(), value);
  std::fflush(stderr);
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double RelDiff(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return Norm(d) / std::max(Norm(b), 1e-300);
}

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Shared data and models.

constexpr std::size_t kTrajectories = 500;
constexpr std::size_t kSteps = 200;
constexpr std::size_t kValTrajectories = 50;

struct Split {
  Dataset train, val;
};

Split MakeSplit(const Dataset& d, std::uint64_t seed) {
  auto [train, val] = SplitDataset(d, kValTrajectories, seed);
  return {std::move(train), std::move(val)};
}

// Short segments (1, 2, then 4 steps) make each optimizer step cheap; on a
// single core the number of updates matters more than the segment length.
TrainConfig BaseTrain(std::uint64_t seed, std::size_t steps) {
  TrainConfig t;
  t.stage_steps = {steps};
  t.adam.lr = 2e-3;
  t.clip_norm = 1.0;
  t.segment_length = 1;
  t.segment_length_max = 4;
  t.batch_size = 16;
  t.normalized_loss = true;
  t.val_every = std::max<std::size_t>(1, steps / 5);
  t.val_horizons = {16, 100};
  t.n_val_windows = 64;
  t.seed = seed;
  return t;
}

DynamicsParams FreshModel(const Env& env, const Dataset& train, ModelKind kind,
                          std::size_t correctors, std::uint64_t seed) {
  ModelSize size = ModelSize::Desk();
  size.correctors = correctors;
  const EnvSpec& spec = env.spec();
  const ModelArchitecture structured =
      MakeStructuredArchitecture(spec.dims, size, spec.periodic);
  ModelArchitecture arch = structured;
  if (kind == ModelKind::kPlainResNet) {
    Rng probe(0);
    const std::size_t budget = InitDynamicsParams(structured, probe).ParamCount();
    arch = MakePlainArchitecture(spec.dims, size.state_blocks, budget,
                                 spec.periodic);
  }
  Rng rng(MixSeed(seed, 0x6d6f64656c));
  DynamicsParams p = InitDynamicsParams(arch, rng);
  p.norm = FitNormalization(arch, train);
  return p;
}

struct Model {
  TrainResult result;
  std::size_t ParamCount() const { return result.params.ParamCount(); }
};

class Workspace {
 public:
  const Env& env(const std::string& name) {
    auto& e = envs_[name];
    if (!e) e = MakeEnv(name);
    return *e;
  }

  // Random-action ("-r") training data: 500 x 200, 50 held out.
  const Split& RandomData(const std::string& name) {
    auto it = random_.find(name);
    if (it != random_.end()) return it->second;
    const Dataset d =
        GenerateDataset(env(name), {}, kTrajectories, kSteps, 1);
    return random_.emplace(name, MakeSplit(d, 1)).first->second;
  }

  // Independent random-action test trajectories (300 steps, so windows
  // start anywhere in [100, 200]).
  const Dataset& TestData(const std::string& name) {
    auto it = test_.find(name);
    if (it != test_.end()) return it->second;
    return test_.emplace(name, GenerateDataset(env(name), {}, 100, 300, 7))
        .first->second;
  }

  // Planner-generated ("-p") pendulum data.
  const Split& PlannerData() {
    if (!planner_data_) {
      const auto t0 = Clock::now();
      const Env& e = env("pendulum");
      const Dataset d = GeneratePlannerDataset(
          e, MakeTask("pendulum"), DataPlanner(), kTrajectories, kSteps, 3,
          0.3, Execution::kParallel);
      planner_data_ = MakeSplit(d, 3);
      Progress("  [%s data] %.1f s\n", "-p", Seconds(t0));
    }
    return *planner_data_;
  }

  // Cheaper planner used only to generate "-p" trajectories.
  static PlannerConfig DataPlanner() {
    PlannerConfig p;
    p.horizon = 15;
    p.population = 32;
    p.iterations = 2;
    return p;
  }

  const Model& Train(const std::string& key, const Split& data,
                     DynamicsParams p0, const TrainConfig& cfg,
                     bool multistage = true) {
    auto it = models_.find(key);
    if (it != models_.end()) return it->second;
    Model m;
    m.result = multistage ? TrainMultistage(cfg, data.train, data.val, p0)
                          : TrainEndToEnd(cfg, data.train, data.val, p0);
    Progress("  [%s] trained in %.1f s\n", key, m.result.log.seconds);
    return models_.emplace(key, std::move(m)).first->second;
  }

  // Structured (or plain) pendulum model on "-r" data, seed s.
  const Model& Pendulum(ModelKind kind, std::uint64_t seed) {
    const Env& e = env("pendulum");
    const Split& data = RandomData("pendulum");
    const std::string key =
        std::string(kind == ModelKind::kStructured ? "pendulum-structured"
                                                   : "pendulum-plain") +
        "-s" + std::to_string(seed);
    return Train(key, data, FreshModel(e, data.train, kind, 0, seed),
                 PendulumTrain(seed));
  }

  static TrainConfig PendulumTrain(std::uint64_t seed) {
    return BaseTrain(seed, 6000);
  }

  static TrainConfig ReacherTrain(std::uint64_t seed, double noise) {
    TrainConfig t = BaseTrain(seed, 20000);
    t.noise_sigma = noise;
    return t;
  }

  const Model& Reacher(double noise) {
    const Env& e = env("reacher2");
    const Split& data = RandomData("reacher2");
    return Train("reacher2-noise" + Fmt("%g", noise), data,
                 FreshModel(e, data.train, ModelKind::kStructured, 0, 0),
                 ReacherTrain(0, noise));
  }

 private:
  std::map<std::string, std::unique_ptr<Env>> envs_;
  std::map<std::string, Split> random_;
  std::map<std::string, Dataset> test_;
  std::optional<Split> planner_data_;
  std::map<std::string, Model> models_;
};

BenchmarkResult Score(const DynamicsParams& p, const Dataset& data,
                      std::vector<std::size_t> horizons) {
  const ModelSystem sys(p);
  BenchmarkOptions opts;
  opts.horizons = std::move(horizons);
  opts.n_eval = 256;
  return BenchmarkDataset(sys, data, opts);
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness.

Outcome GradientCorrectness(Workspace&) {
  double worst_bp = 0.0, worst_adj = 0.0, worst_mutual = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    Rng rng(MixSeed(1, instance));
    const std::size_t n = 1 + instance % 2;
    const StateDims dims{n, n, 1 + static_cast<std::size_t>(instance / 2) % 2};
    ModelSize size;
    size.position_blocks = size.state_blocks = size.corrector_blocks = 1;
    size.position_hidden = size.state_hidden = size.corrector_hidden = 4;
    size.action_blocks = 1;
    size.action_hidden = 3;
    size.correctors = 1;
    DynamicsParams p =
        InitDynamicsParams(MakeStructuredArchitecture(dims, size), rng);
    p.active_correctors = 1;
    std::normal_distribution<double> noise(0.0, 0.2);
    for (double& v : p.values) v += noise(rng);

    TrajectorySegment seg;
    seg.dt = 0.05;
    seg.state_dim = dims.state();
    seg.action_dim = dims.da;
    const std::size_t steps = 3;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    seg.states.resize((steps + 1) * dims.state());
    seg.actions.resize(steps * dims.da);
    for (double& v : seg.states) v = u(rng);
    for (double& v : seg.actions) v = u(rng);

    LossOptions opts;
    opts.rollout.integrator.rtol = opts.rollout.integrator.atol = 1e-12;
    opts.adjoint.rtol = opts.adjoint.atol = 1e-12;
    std::vector<double> g_bp(p.ParamCount(), 0.0), g_adj(p.ParamCount(), 0.0);
    SegmentLoss(p, seg, opts, {}, g_bp);
    opts.path = GradPath::kAdjoint;
    SegmentLoss(p, seg, opts, {}, g_adj);

    std::vector<double> g_fd(p.ParamCount());
    const double h = 1e-6;
    for (std::size_t i = 0; i < p.ParamCount(); ++i) {
      const double v0 = p.values[i];
      p.values[i] = v0 + h;
      const double lp = SegmentLoss(p, seg, opts, {}, {});
      p.values[i] = v0 - h;
      const double lm = SegmentLoss(p, seg, opts, {}, {});
      p.values[i] = v0;
      g_fd[i] = (lp - lm) / (2.0 * h);
    }
    worst_bp = std::max(worst_bp, RelDiff(g_bp, g_fd));
    worst_adj = std::max(worst_adj, RelDiff(g_adj, g_fd));
    worst_mutual = std::max(worst_mutual, RelDiff(g_adj, g_bp));
  }
  const bool pass = worst_bp <= 1e-3 && worst_adj <= 1e-3 &&
                    worst_mutual <= 1e-3;
  return {pass, "worst relative error: backprop vs FD " +
                    Fmt("%.2e", worst_bp) + ", adjoint vs FD " +
                    Fmt("%.2e", worst_adj) + ", mutual " +
                    Fmt("%.2e", worst_mutual) + " (limit 1e-3)"};
}

// ---------------------------------------------------------------------------
// 2. Integrator order.

class Decay : public VectorField {
 public:
  std::size_t dim() const override { return 1; }
  void Eval(double, std::span<const double> y,
            std::span<double> dy) const override {
    dy[0] = -y[0];
  }
};

double OrderSlope(RkMethod method, const std::vector<double>& hs) {
  const Decay f;
  std::vector<double> x, y;
  for (double h : hs) {
    const auto n = static_cast<std::int64_t>(std::lround(1.0 / h));
    const double err = std::abs(
        FixedStepIntegrate(f, method, std::vector<double>{1.0}, 0.0, 1.0, n)
            .y[0] -
        std::exp(-1.0));
    x.push_back(std::log(h));
    y.push_back(std::log(err));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

Outcome IntegratorOrder(Workspace&) {
  // Below these step sizes the errors reach the rounding floor.
  const double dopri = OrderSlope(RkMethod::kDopri5, {0.1, 0.05, 0.02, 0.01});
  const double rk4 =
      OrderSlope(RkMethod::kRk4, {0.1, 0.05, 0.02, 0.01, 0.005});
  const bool pass = std::abs(dopri - 5.0) <= 0.3 && std::abs(rk4 - 4.0) <= 0.3;
  return {pass, "log-log slopes: DOPRI5 " + Fmt("%.3f", dopri) + " (5 +- 0.3), RK4 " +
                    Fmt("%.3f", rk4) + " (4 +- 0.3)"};
}

// ---------------------------------------------------------------------------
// 3. Structured vs plain.

double Final(const Model& m, std::size_t horizon) {
  return m.result.log.FinalValidation(horizon);
}

double Best(const Model& m, std::size_t horizon) {
  double best = std::numeric_limits<double>::infinity();
  for (const ValidationLog& v : m.result.log.validation) {
    for (const HorizonScore& s : v.scores) {
      if (s.horizon == horizon && v.n_failed == 0) best = std::min(best, s.mse);
    }
  }
  return best;
}

Outcome StructuredVsPlain(Workspace& ws) {
  std::vector<double> structured, plain;
  std::size_t ps = 0, pp = 0;
  for (std::uint64_t seed : {0, 1, 2}) {
    const Model& s = ws.Pendulum(ModelKind::kStructured, seed);
    const Model& p = ws.Pendulum(ModelKind::kPlainResNet, seed);
    structured.push_back(Final(s, 16));
    plain.push_back(Best(p, 16));
    ps = s.ParamCount();
    pp = p.ParamCount();
  }
  const double ms = Median(structured), mp = Median(plain);
  return {ms < mp,
          "median 16-step val MSE: structured final " + Fmt("%.3e", ms) +
              " vs plain best " + Fmt("%.3e", mp) + " (params " +
              std::to_string(ps) + " vs " + std::to_string(pp) + ", " +
              std::to_string(Workspace::PendulumTrain(0).stage_steps[0]) +
              " steps)"};
}

// ---------------------------------------------------------------------------
// 4. Long-horizon prediction.

Outcome LongHorizon(Workspace& ws) {
  const double pend =
      Score(ws.Pendulum(ModelKind::kStructured, 0).result.params,
            ws.TestData("pendulum"), {100})
          .scores[0]
          .mse_normalized;
  const double reach = Score(ws.Reacher(0.0).result.params,
                             ws.TestData("reacher2"), {100})
                           .scores[0]
                           .mse_normalized;
  return {pend < 1e-2 && reach < 1e-2,
          "normalized 100-step MSE: pendulum " + Fmt("%.3e", pend) +
              ", reacher2 " + Fmt("%.3e", reach) + " (limit 1e-2)"};
}

// ---------------------------------------------------------------------------
// 5. Multistage vs end-to-end.

Outcome MultistageVsEndToEnd(Workspace& ws) {
  const Env& e = ws.env("wallpendulum");
  const Split& data = ws.RandomData("wallpendulum");
  std::vector<double> multi, e2e;
  for (std::uint64_t seed : {0, 1, 2}) {
    const DynamicsParams p0 =
        FreshModel(e, data.train, ModelKind::kStructured, 1, seed);
    TrainConfig cfg = BaseTrain(seed, 0);
    cfg.stage_steps = {2000, 1000};
    cfg.val_every = 1000;
    const std::string s = "-s" + std::to_string(seed);
    multi.push_back(Final(ws.Train("wall-multistage" + s, data, p0, cfg), 100));
    e2e.push_back(
        Final(ws.Train("wall-end-to-end" + s, data, p0, cfg, false), 100));
  }
  const double mm = Median(multi), me = Median(e2e);
  return {mm <= me, "median final 100-step val MSE: multistage " +
                        Fmt("%.3e", mm) + " vs end-to-end " + Fmt("%.3e", me) +
                        " (2000 + 1000 steps vs 3000)"};
}

// ---------------------------------------------------------------------------
// 6. Noise robustness.

Outcome NoiseRobustness(Workspace& ws) {
  const Dataset& test = ws.TestData("reacher2");
  const double clean =
      Score(ws.Reacher(0.0).result.params, test, {100}).scores[0].mse;
  const double noisy =
      Score(ws.Reacher(0.01).result.params, test, {100}).scores[0].mse;
  const double ratio = noisy / clean;
  return {ratio < 2.0 && ratio > 0.5,
          "reacher2 100-step MSE: clean " + Fmt("%.3e", clean) +
              ", sigma 0.01 " + Fmt("%.3e", noisy) + ", ratio " +
              Fmt("%.3f", ratio) + " (must lie in (0.5, 2))"};
}

// ---------------------------------------------------------------------------
// 7. LCE fidelity.

Outcome LceFidelity(Workspace& ws) {
  const Env& e = ws.env("acrobot");
  const Split& data = ws.RandomData("acrobot");
  const Model& m = ws.Train(
      "acrobot", data,
      FreshModel(e, data.train, ModelKind::kStructured, 0, 0),
      BaseTrain(0, 20000));
  LceConfig cfg;
  cfg.delta = 1e-5;
  cfg.steps = 1000;
  cfg.n_traj = 2000;
  cfg.rollout.solver = Solver::kRk4;
  cfg.rollout.rk4_substeps = 4;
  const std::vector<double> zero(e.action_dim(), 0.0);
  auto sample = [&e](Rng& rng) { return e.SampleInitialState(rng); };
  const auto t0 = Clock::now();
  const LceResult oracle = EstimateLce(e, sample, zero, cfg);
  const ModelSystem sys(m.result.params);
  const LceResult model = EstimateLce(sys, sample, zero, cfg);
  Progress("  [%s] LCE estimates in %.1f s\n", "acrobot", Seconds(t0));
  const double rel = std::abs(model.lambda - oracle.lambda) /
                     std::abs(oracle.lambda);
  return {rel <= 0.1 && model.n_used > 0,
          "lambda: model " + Fmt("%.4f", model.lambda) + " (" +
              std::to_string(model.n_dropped) + " dropped), oracle " +
              Fmt("%.4f", oracle.lambda) + ", relative difference " +
              Fmt("%.3f", rel) + " (limit 0.1)"};
}

// ---------------------------------------------------------------------------
// 8. Zero-shot planning.

Outcome ZeroShot(Workspace& ws) {
  const Env& e = ws.env("pendulum");
  const ModelSystem sys(ws.Pendulum(ModelKind::kStructured, 0).result.params);
  ZeroShotConfig cfg;
  cfg.episodes = 3;
  const ZeroShotReport r = ZeroShotEval(sys, e, MakeTask("pendulum"), cfg);
  const double ratio = r.mean_return / r.oracle_planner_return;
  return {ratio >= 0.9 && r.planning_oracle_calls == 0,
          "mean return " + Fmt("%.3f", r.mean_return) + " vs oracle planner " +
              Fmt("%.3f", r.oracle_planner_return) + ", ratio " +
              Fmt("%.3f", ratio) + " (>= 0.9), planning oracle calls " +
              std::to_string(r.planning_oracle_calls)};
}

// ---------------------------------------------------------------------------
// 9. Generalization direction.

Outcome Generalization(Workspace& ws) {
  const Env& e = ws.env("pendulum");
  const Split& r_data = ws.RandomData("pendulum");
  const Split& p_data = ws.PlannerData();
  std::vector<double> r_on_p, p_on_r, r_on_r, p_on_p;
  for (std::uint64_t seed : {0, 1, 2}) {
    const Model& rm = ws.Pendulum(ModelKind::kStructured, seed);
    const Model& pm = ws.Train(
        "pendulum-p-s" + std::to_string(seed), p_data,
        FreshModel(e, p_data.train, ModelKind::kStructured, 0, seed),
        Workspace::PendulumTrain(seed));
    r_on_p.push_back(Score(rm.result.params, p_data.val, {100}).scores[0].mse);
    p_on_r.push_back(Score(pm.result.params, r_data.val, {100}).scores[0].mse);
    r_on_r.push_back(Score(rm.result.params, r_data.val, {100}).scores[0].mse);
    p_on_p.push_back(Score(pm.result.params, p_data.val, {100}).scores[0].mse);
  }
  const double a = Median(r_on_p), b = Median(p_on_r);
  // In-distribution scores are reported for context only.
  return {a < b, "median 100-step MSE: -r model on -p " + Fmt("%.3e", a) +
                     " vs -p model on -r " + Fmt("%.3e", b) +
                     " (in-distribution: -r " + Fmt("%.3e", Median(r_on_r)) +
                     ", -p " + Fmt("%.3e", Median(p_on_p)) + ")"};
}

// ---------------------------------------------------------------------------
// 10. Penalty and flow correctness.

Outcome PenaltyAndFlow(Workspace& ws) {
  const PenaltyConfig pc{-2.0, 0.5};
  const double inf = std::numeric_limits<double>::infinity();
  const bool limits = PenalizedReward(1.25, pc.tau, pc) == 0.75 &&
                      PenalizedReward(1.25, inf, pc) == 1.25 &&
                      PenalizedReward(1.25, -inf, pc) == 0.25;

  // Flow on pendulum states; round trips on the data and on base samples.
  const Dataset& d = ws.RandomData("pendulum").train;
  std::vector<double> states;
  for (const TrajectorySegment& s : d.segments) {
    states.insert(states.end(), s.states.begin(), s.states.end());
  }
  FlowConfig fc;
  fc.steps = 1500;
  const FlowParams flow = FitFlow(states, 2, fc);
  double round_trip = 0.0;
  Rng rng(5);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t row = rng() % (states.size() / 2);
    const std::span<const double> s(states.data() + 2 * row, 2);
    double ld_fwd = 0.0, ld_inv = 0.0;
    const auto z = FlowToBase(flow, s, &ld_fwd);
    const auto back = FlowFromBase(flow, z, &ld_inv);
    for (int k = 0; k < 2; ++k) {
      round_trip = std::max(round_trip, std::abs(back[k] - s[k]));
    }
    round_trip = std::max(round_trip, std::abs(ld_fwd + ld_inv));
    const std::vector<double> zb = {normal(rng), normal(rng)};
    const auto sb = FlowFromBase(flow, zb);
    const auto zr = FlowToBase(flow, sb, &ld_fwd);
    for (int k = 0; k < 2; ++k) {
      round_trip = std::max(round_trip, std::abs(zr[k] - zb[k]));
    }
  }

  // Midpoint rule over a box of +-10 standard deviations.
  const int grid = 600;
  const double half = 10.0;
  double integral = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double u = -half + (i + 0.5) * 2.0 * half / grid;
      const double v = -half + (j + 0.5) * 2.0 * half / grid;
      const std::vector<double> s = {flow.mean[0] + flow.std[0] * u,
                                     flow.mean[1] + flow.std[1] * v};
      integral += std::exp(FlowLogDensity(flow, s));
    }
  }
  integral *= (2.0 * half * flow.std[0] / grid) * (2.0 * half * flow.std[1] / grid);
  const bool pass = limits && round_trip < 1e-8 && std::abs(integral - 1.0) <= 0.03;
  return {pass, std::string("penalty limits ") + (limits ? "exact" : "WRONG") +
                    ", max round-trip error " + Fmt("%.2e", round_trip) +
                    " (< 1e-8), 2-D density integral " + Fmt("%.4f", integral) +
                    " (1 +- 0.03)"};
}

// ---------------------------------------------------------------------------
// 11. Format stability.

Outcome FormatStability(Workspace& ws) {
  const Dataset& d = ws.TestData("pendulum");
  Dataset small = d;
  small.segments.resize(5);
  small.config_hash = 0x0123456789abcdefULL;
  const std::string trj = EncodeDataset(small);
  const bool trj_ok = EncodeDataset(DecodeDataset(trj)) == trj &&
                      DecodeDataset(trj) == small;

  Rng rng(11);
  ModelSize size = ModelSize::Desk();
  size.correctors = 2;
  const EnvSpec& spec = ws.env("reacher2").spec();
  DynamicsParams p = InitDynamicsParams(
      MakeStructuredArchitecture(spec.dims, size, spec.periodic), rng);
  p.active_correctors = 1;
  const std::string msnn = EncodeCheckpoint(ToTensors(p, 42));
  const bool msnn_ok =
      EncodeCheckpoint(DecodeCheckpoint(msnn)) == msnn &&
      EncodeCheckpoint(ToTensors(FromTensors(DecodeCheckpoint(msnn)), 42)) ==
          msnn;

  std::ifstream schema_file(std::string(DYNSIM_SOURCE_DIR) +
                            "/schemas/benchmark_report.schema.json");
  const nlohmann::json schema = nlohmann::json::parse(schema_file);
  const Env& e = ws.env("pendulum");
  BenchmarkOptions opts;
  opts.n_eval = 16;
  const nlohmann::json report = BenchmarkReportJson(
      BenchmarkDataset(e, d, opts), "pendulum", "oracle", 42);
  const auto errors = ValidateJsonSchema(schema, report);
  const bool pass = trj_ok && msnn_ok && errors.empty();
  return {pass, std::string("MOSIMTRJ round trip ") +
                    (trj_ok ? "byte-exact" : "MISMATCH") + ", MSNN round trip " +
                    (msnn_ok ? "byte-exact" : "MISMATCH") + ", report schema " +
                    (errors.empty() ? "valid" : "invalid: " + errors[0])};
}

struct Criterion {
  int id;
  const char* name;
  double budget_minutes;
  std::function<Outcome(Workspace&)> run;
};

const std::vector<Criterion>& Criteria() {
  static const std::vector<Criterion> c = {
      {1, "gradient correctness", 1, GradientCorrectness},
      {2, "integrator order", 1, IntegratorOrder},
      {3, "structured vs plain predictor", 30, StructuredVsPlain},
      {4, "long-horizon prediction", 60, LongHorizon},
      {5, "multistage vs end-to-end", 45, MultistageVsEndToEnd},
      {6, "noise robustness", 30, NoiseRobustness},
      {7, "LCE fidelity", 60, LceFidelity},
      {8, "zero-shot planning", 20, ZeroShot},
      {9, "generalization direction", 45, Generalization},
      {10, "penalty and flow correctness", 0, PenaltyAndFlow},
      {11, "format stability", 0, FormatStability},
  };
  return c;
}

}  // namespace
}  // namespace dynsim

int main(int argc, char** argv) {
  using namespace dynsim;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  Workspace ws;
  int failures = 0;
  for (const Criterion& c : Criteria()) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run(ws);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = Seconds(t0);
    const bool in_time = c.budget_minutes <= 0 || s <= 60.0 * c.budget_minutes;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::string budget;
    if (c.budget_minutes > 0) {
      budget = ", budget " + Fmt("%.0f", c.budget_minutes) + " min" +
               (in_time ? "" : " EXCEEDED");
    }
    std::printf("[%s] criterion %d (%s): %s [%.1f s%s]\n",
                pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), s,
                budget.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
