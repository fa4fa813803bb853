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

#include "dynsim/cli/cli.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dynsim/cli/config.h"
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
#include "dynsim/parallel/execution.h"
#include "dynsim/train/few_shot.h"
#include "dynsim/train/trainer.h"
#include "json.hpp"

namespace dynsim {
namespace {

using nlohmann::json;

enum class Kind { kString, kInt, kReal, kBool, kInts, kReals };

struct Flag {
  const char* name;
  const char* pointer;
  Kind kind;
  const char* help;
};

const std::vector<Flag>& CommonFlags() {
  static const std::vector<Flag> f = {
      {"--env", "/env", Kind::kString, "environment name"},
      {"--seed", "/seed", Kind::kInt, "random seed"},
      {"--threads", "/threads", Kind::kInt,
       "worker threads (0: all logical cores)"},
      {"--out", "/out", Kind::kString, "output path"},
  };
  return f;
}

const std::vector<Flag> kIntegratorFlags = {
    {"--solver", "/integrator/solver", Kind::kString, "dopri5 | rk4"},
    {"--rtol", "/integrator/rtol", Kind::kReal, "relative tolerance"},
    {"--atol", "/integrator/atol", Kind::kReal, "absolute tolerance"},
    {"--rk4-substeps", "/integrator/rk4_substeps", Kind::kInt,
     "RK4 steps per control interval"},
};

const std::vector<Flag> kPlannerFlags = {
    {"--horizon", "/planner/horizon", Kind::kInt, "planning horizon (steps)"},
    {"--population", "/planner/population", Kind::kInt, "CEM population"},
    {"--iterations", "/planner/iterations", Kind::kInt, "CEM iterations"},
    {"--elite-fraction", "/planner/elite_fraction", Kind::kReal,
     "elite fraction"},
};

std::vector<Flag> Join(std::initializer_list<std::vector<Flag>> parts) {
  std::vector<Flag> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

struct Command {
  const char* name;
  const char* help;
  std::vector<Flag> flags;
};

const std::vector<Command>& Commands() {
  static const std::vector<Command> c = {
      {"gen-data", "generate a trajectory dataset (MOSIMTRJ)",
       Join({{{"--mode", "/data/mode", Kind::kString, "r (random) | p (planner)"},
        {"--n-traj", "/data/n_traj", Kind::kInt, "trajectories"},
        {"--steps", "/data/steps", Kind::kInt, "control steps per trajectory"},
        {"--sampler", "/data/sampler", Kind::kString,
         "uniform_per_step | poisson_hold"},
        {"--rate", "/data/rate", Kind::kReal, "poisson_hold switch rate (1/s)"},
              {"--policy-noise", "/data/policy_noise", Kind::kReal,
               "planner action noise (fraction of half range)"}},
             kPlannerFlags})},
      {"train", "train a dynamics model",
       Join({{{"--data", "/data/path", Kind::kString, "training dataset"},
              {"--val-data", "/data/val_path", Kind::kString,
               "validation dataset (default: split of --data)"},
              {"--n-val", "/data/n_val", Kind::kInt,
               "validation trajectories split from --data"},
              {"--init", "/model/init", Kind::kString,
               "checkpoint to start from"},
              {"--kind", "/model/kind", Kind::kString, "structured | plain"},
              {"--size", "/model/size", Kind::kString,
               "small | medium | large | desk"},
              {"--correctors", "/model/correctors", Kind::kInt,
               "corrector count"},
              {"--mode", "/train/mode", Kind::kString,
               "multistage | end_to_end"},
              {"--stage-steps", "/train/stage_steps", Kind::kInts,
               "optimizer steps per stage, comma separated"},
              {"--batch-size", "/train/batch_size", Kind::kInt, "batch size"},
              {"--segment-length", "/train/segment_length", Kind::kInt,
               "initial segment length"},
              {"--segment-length-max", "/train/segment_length_max", Kind::kInt,
               "final segment length"},
              {"--lr", "/train/lr", Kind::kReal, "learning rate"},
              {"--clip-norm", "/train/clip_norm", Kind::kReal,
               "gradient clipping norm (0: off)"},
              {"--grad-path", "/train/grad_path", Kind::kString,
               "backprop_steps | adjoint"},
              {"--noise-sigma", "/train/noise_sigma", Kind::kReal,
               "observation noise on training states"},
              {"--log", "/train/log_path", Kind::kString, "JSON-lines log"},
              {"--checkpoint-dir", "/train/checkpoint_dir", Kind::kString,
               "periodic checkpoint directory"}},
             kIntegratorFlags})},
      {"benchmark", "rollout MSE of a model on a dataset",
       Join({{{"--model", "/model/path", Kind::kString,
               "checkpoint or 'oracle'"},
              {"--data", "/data/path", Kind::kString, "dataset"},
              {"--horizons", "/benchmark/horizons", Kind::kInts,
               "horizons, comma separated"},
              {"--n-eval", "/benchmark/n_eval", Kind::kInt, "windows scored"},
              {"--warm-in", "/benchmark/warm_in", Kind::kInt,
               "steps skipped at the start of each trajectory"}},
             kIntegratorFlags})},
      {"plan", "zero-shot MPC in a model, executed in the oracle env",
       Join({{{"--model", "/model/path", Kind::kString,
               "checkpoint or 'oracle'"},
              {"--episodes", "/zero_shot/episodes", Kind::kInt, "episodes"},
              {"--episode-steps", "/zero_shot/episode_steps", Kind::kInt,
               "steps per episode (0: task default)"},
              {"--oracle-reference", "/zero_shot/oracle_reference",
               Kind::kBool, "also run the planner inside the oracle"},
              {"--flow", "/zero_shot/flow", Kind::kString,
               "density model for the planning penalty"},
              {"--tau", "/zero_shot/tau", Kind::kReal, "penalty inflection"},
              {"--alpha", "/zero_shot/alpha", Kind::kReal, "penalty width"},
              {"--data", "/data/path", Kind::kString,
               "states that calibrate tau and alpha"}},
             kPlannerFlags})},
      {"lce", "largest Lyapunov exponent of a model or the oracle",
       Join({{{"--model", "/model/path", Kind::kString,
               "checkpoint or 'oracle'"},
              {"--delta", "/lce/delta", Kind::kReal, "initial separation"},
              {"--steps", "/lce/steps", Kind::kInt, "control steps"},
              {"--n-traj", "/lce/n_traj", Kind::kInt, "trajectories"},
              {"--action", "/lce/action", Kind::kReals, "held action"}},
             kIntegratorFlags})},
      {"fit-flow", "fit the state density model",
       {{"--data", "/data/path", Kind::kString, "dataset"},
        {"--layers", "/flow/layers", Kind::kInt, "coupling layers"},
        {"--hidden", "/flow/hidden", Kind::kInt, "hidden width"},
        {"--steps", "/flow/steps", Kind::kInt, "optimizer steps"},
        {"--lr", "/flow/lr", Kind::kReal, "learning rate"}}},
      {"few-shot", "adapt a model with virtual and real interaction",
       Join({{{"--model", "/model/path", Kind::kString, "pretrained model"},
              {"--data", "/data/path", Kind::kString, "pretraining dataset"},
              {"--virtual-steps", "/few_shot/virtual_steps", Kind::kInt,
               "virtual interaction steps"},
              {"--virtual-per-collect", "/few_shot/virtual_per_collect",
               Kind::kInt, "virtual steps between collections"},
              {"--real-per-collect", "/few_shot/real_per_collect", Kind::kInt,
               "real steps per collection"},
              {"--collect", "/few_shot/collect", Kind::kBool,
               "collect real data"}},
             kPlannerFlags})},
  };
  return c;
}

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    parts.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

json ParseScalar(const std::string& flag, const std::string& text, Kind kind) {
  try {
    std::size_t used = 0;
    switch (kind) {
      case Kind::kString:
        return text;
      case Kind::kInt: {
        const long long v = std::stoll(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Kind::kReal: {
        const double v = std::stod(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Kind::kBool:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
      default:
        break;
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError("bad value '" + text + "' for " + flag);
}

json ParseFlagValue(const Flag& f, const std::string& text) {
  if (f.kind == Kind::kInts || f.kind == Kind::kReals) {
    const Kind item = f.kind == Kind::kInts ? Kind::kInt : Kind::kReal;
    json arr = json::array();
    for (const std::string& p : SplitCommas(text)) {
      arr.push_back(ParseScalar(f.name, p, item));
    }
    return arr;
  }
  return ParseScalar(f.name, text, f.kind);
}

void Emit(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
}

std::unique_ptr<Env> EnvOrNull(const std::string& name) {
  const auto& names = EnvNames();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    return nullptr;
  }
  return MakeEnv(name);
}

// A model named "oracle" is the ground-truth env itself.
struct LoadedModel {
  std::unique_ptr<Env> oracle;
  std::unique_ptr<DynamicsParams> params;
  std::unique_ptr<ModelSystem> system;
  const ControlledSystem& get() const {
    return oracle ? static_cast<const ControlledSystem&>(*oracle) : *system;
  }
};

LoadedModel LoadModel(const std::string& path, const std::string& env) {
  LoadedModel m;
  if (path == "oracle") {
    m.oracle = MakeEnv(env);
    return m;
  }
  m.params = std::make_unique<DynamicsParams>(LoadDynamics(path));
  m.system = std::make_unique<ModelSystem>(*m.params);
  return m;
}

void CheckModelDims(const ControlledSystem& model, const Env& env) {
  if (model.state_dim() != env.state_dim() ||
      model.action_dim() != env.action_dim()) {
    throw DimensionError("model dimensions do not match env '" +
                         env.spec().name + "'");
  }
}

std::vector<double> AllStates(const Dataset& d) {
  std::vector<double> states;
  for (const TrajectorySegment& seg : d.segments) {
    states.insert(states.end(), seg.states.begin(), seg.states.end());
  }
  return states;
}

int GenData(const RunConfig& cfg, std::ostream& out) {
  const std::string env_name = cfg.RequireString("/env");
  const std::string path = cfg.RequireString("/out");
  const std::unique_ptr<Env> env = MakeEnv(env_name);
  const std::string mode = cfg.String("/data/mode", "r");
  const std::size_t n_traj = cfg.Size("/data/n_traj", 100);
  const std::size_t steps = cfg.Size("/data/steps", 200);
  Dataset d;
  if (mode == "r" || mode == "random") {
    ActionSamplerSpec sampler;
    sampler.mode =
        ParseSamplerMode(cfg.String("/data/sampler", "uniform_per_step"));
    sampler.rate = cfg.Double("/data/rate", sampler.rate);
    d = GenerateDataset(*env, sampler, n_traj, steps, cfg.Seed());
  } else if (mode == "p" || mode == "planner") {
    d = GeneratePlannerDataset(*env, MakeTask(env_name), cfg.Planner(), n_traj,
                               steps, cfg.Seed(),
                               cfg.Double("/data/policy_noise", 0.3),
                               Execution::kParallel);
  } else {
    throw ConfigError("unknown data mode '" + mode + "' (r | p)");
  }
  d.config_hash = cfg.Hash();
  WriteDataset(path, d);
  Emit({{"command", "gen-data"},
        {"env", env_name},
        {"mode", mode == "random" ? "r" : mode == "planner" ? "p" : mode},
        {"trajectories", d.segments.size()},
        {"steps", d.TotalSteps()},
        {"env_constants_hash", HexHash(EnvConstantsHash(*env))},
        {"config_hash", HexHash(d.config_hash)},
        {"out", path}},
       "", out);
  return kExitOk;
}

DynamicsParams BuildModel(const RunConfig& cfg, const Dataset& train) {
  if (cfg.Has("/model/init")) {
    DynamicsParams p = LoadDynamics(cfg.RequireString("/model/init"));
    if (!(p.arch.dims == train.dims)) {
      throw DimensionError("initial checkpoint does not match the dataset");
    }
    return p;
  }
  ModelSize size = ModelSize::ByName(cfg.String("/model/size", "desk"));
  size.correctors = cfg.Size("/model/correctors", size.correctors);
  std::vector<std::uint8_t> periodic;
  if (const auto env = EnvOrNull(train.env)) periodic = env->spec().periodic;
  const ModelArchitecture structured =
      MakeStructuredArchitecture(train.dims, size, periodic);
  const std::string kind = cfg.String("/model/kind", "structured");
  ModelArchitecture arch;
  if (kind == "structured") {
    arch = structured;
  } else if (kind == "plain") {
    Rng probe(0);
    const std::size_t budget =
        InitDynamicsParams(structured, probe).ParamCount();
    arch = MakePlainArchitecture(train.dims, size.state_blocks, budget,
                                 periodic);
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }
  Rng rng(MixSeed(cfg.Seed(), 0x696e6974));
  DynamicsParams p = InitDynamicsParams(arch, rng);
  p.norm = FitNormalization(arch, train);
  return p;
}

int Train(const RunConfig& cfg, std::ostream& out) {
  const std::string path = cfg.RequireString("/out");
  const Dataset data = ReadDataset(cfg.RequireString("/data/path"));
  Dataset train, val;
  if (cfg.Has("/data/val_path")) {
    train = data;
    val = ReadDataset(cfg.RequireString("/data/val_path"));
  } else {
    const std::size_t n_val = cfg.Size(
        "/data/n_val", std::max<std::size_t>(1, data.segments.size() / 10));
    std::tie(train, val) = SplitDataset(data, n_val, cfg.Seed());
  }
  DynamicsParams p0 = BuildModel(cfg, train);
  TrainConfig t = cfg.Train();
  if (!cfg.Has("/train/stage_steps")) {
    t.stage_steps.assign(1 + p0.arch.correctors.size(), 1000);
    t.stage_steps[0] = 2000;
  }
  const std::string mode = cfg.String("/train/mode", "multistage");
  TrainResult r;
  if (mode == "multistage") {
    r = TrainMultistage(t, train, val, std::move(p0));
  } else if (mode == "end_to_end") {
    r = TrainEndToEnd(t, train, val, std::move(p0));
  } else {
    throw ConfigError("unknown train mode '" + mode + "'");
  }
  SaveDynamics(path, r.params, t.config_hash);
  json val_json = json::object();
  if (!r.log.validation.empty()) {
    for (const HorizonScore& s : r.log.validation.back().scores) {
      val_json[std::to_string(s.horizon)] = {
          {"mse", s.mse}, {"mse_normalized", s.mse_normalized}};
    }
  }
  Emit({{"command", "train"},
        {"env", train.env},
        {"mode", mode},
        {"params", r.params.ParamCount()},
        {"steps", r.log.steps.size()},
        {"final_loss",
         r.log.steps.empty() ? json(nullptr) : json(r.log.steps.back().loss)},
        {"validation", val_json},
        {"seconds", r.log.seconds},
        {"config_hash", HexHash(t.config_hash)},
        {"out", path}},
       "", out);
  return kExitOk;
}

int Benchmark(const RunConfig& cfg, std::ostream& out) {
  const Dataset data = ReadDataset(cfg.RequireString("/data/path"));
  const std::string model_path = cfg.RequireString("/model/path");
  const LoadedModel model = LoadModel(model_path, data.env);
  if (model.get().state_dim() != data.dims.state() ||
      model.get().action_dim() != data.dims.da) {
    throw DimensionError("model dimensions do not match the dataset");
  }
  const BenchmarkResult r =
      BenchmarkDataset(model.get(), data, cfg.Benchmark());
  Emit(BenchmarkReportJson(r, data.env, model_path, cfg.Hash()),
       cfg.String("/out", ""), out);
  return kExitOk;
}

int Plan(const RunConfig& cfg, std::ostream& out) {
  const std::string env_name = cfg.RequireString("/env");
  const std::unique_ptr<Env> env = MakeEnv(env_name);
  const std::string model_path = cfg.String("/model/path", "oracle");
  const LoadedModel model = LoadModel(model_path, env_name);
  CheckModelDims(model.get(), *env);
  const Task task = MakeTask(env_name);

  ZeroShotConfig zs;
  zs.planner = cfg.Planner();
  zs.episodes = cfg.Size("/zero_shot/episodes", zs.episodes);
  zs.episode_steps = cfg.Size("/zero_shot/episode_steps", zs.episode_steps);
  zs.oracle_reference =
      cfg.Bool("/zero_shot/oracle_reference", zs.oracle_reference);
  zs.seed = cfg.Seed();
  json penalty = nullptr;
  if (cfg.Has("/zero_shot/flow")) {
    const FlowParams flow = LoadFlow(cfg.RequireString("/zero_shot/flow"));
    if (flow.dim != env->state_dim()) {
      throw DimensionError("flow dimension does not match the env");
    }
    PenaltyConfig pc;
    if (cfg.Has("/zero_shot/tau") && cfg.Has("/zero_shot/alpha")) {
      pc.tau = cfg.Double("/zero_shot/tau", 0.0);
      pc.alpha = cfg.Double("/zero_shot/alpha", 1.0);
    } else if (cfg.Has("/data/path")) {
      pc = DefaultPenaltyConfig(
          flow, AllStates(ReadDataset(cfg.RequireString("/data/path"))));
    } else {
      throw ConfigError("flow penalty needs tau and alpha or --data");
    }
    pc.Validate();
    zs.planning_reward = PenalizeReward(task.reward, flow, pc);
    penalty = {{"tau", pc.tau}, {"alpha", pc.alpha}};
  } else if (cfg.Has("/zero_shot/tau") || cfg.Has("/zero_shot/alpha")) {
    throw ConfigError("tau and alpha require a flow");
  }
  const ZeroShotReport r = ZeroShotEval(model.get(), *env, task, zs);
  json report = ZeroShotReportJson(r, model_path, Fnv1a(
      cfg.doc().contains("planner") ? cfg.doc()["planner"].dump() : "{}"));
  report["config_hash"] = HexHash(cfg.Hash());
  report["penalty"] = penalty;
  Emit(report, cfg.String("/out", ""), out);
  return kExitOk;
}

int Lce(const RunConfig& cfg, std::ostream& out) {
  const std::string env_name = cfg.RequireString("/env");
  const std::unique_ptr<Env> env = MakeEnv(env_name);
  const std::string model_path = cfg.String("/model/path", "oracle");
  const LoadedModel model = LoadModel(model_path, env_name);
  CheckModelDims(model.get(), *env);
  const LceConfig lc = cfg.Lce();
  const std::vector<double> action =
      cfg.Doubles("/lce/action", std::vector<double>(env->action_dim(), 0.0));
  if (action.size() != env->action_dim()) {
    throw DimensionError("lce action has the wrong length");
  }
  const Env& sampler_env = *env;
  const LceResult r = EstimateLce(
      model.get(),
      [&](Rng& rng) { return sampler_env.SampleInitialState(rng); }, action,
      lc);
  Emit({{"command", "lce"},
        {"env", env_name},
        {"model", model_path},
        {"lambda", r.lambda},
        {"std_error", r.std_error},
        {"n_used", r.n_used},
        {"n_dropped", r.n_dropped},
        {"delta", lc.delta},
        {"steps", lc.steps},
        {"config_hash", HexHash(cfg.Hash())}},
       cfg.String("/out", ""), out);
  return kExitOk;
}

int FitFlowCmd(const RunConfig& cfg, std::ostream& out) {
  const std::string path = cfg.RequireString("/out");
  const Dataset data = ReadDataset(cfg.RequireString("/data/path"));
  const std::vector<double> states = AllStates(data);
  const FlowParams flow = FitFlow(states, data.dims.state(), cfg.Flow());
  SaveFlow(path, flow, cfg.Hash());
  const PenaltyConfig pc = DefaultPenaltyConfig(flow, states);
  Emit({{"command", "fit-flow"},
        {"env", data.env},
        {"states", states.size() / data.dims.state()},
        {"tau", pc.tau},
        {"alpha", pc.alpha},
        {"config_hash", HexHash(cfg.Hash())},
        {"out", path}},
       "", out);
  return kExitOk;
}

int FewShot(const RunConfig& cfg, std::ostream& out) {
  const std::string path = cfg.RequireString("/out");
  const Dataset data = ReadDataset(cfg.RequireString("/data/path"));
  const std::unique_ptr<Env> env = MakeEnv(data.env);
  DynamicsParams params = LoadDynamics(cfg.RequireString("/model/path"));
  const ModelSystem model(params);
  CheckModelDims(model, *env);
  const Task task = MakeTask(data.env);
  MpcController policy(model, task.reward, env->spec().action_low,
                       env->spec().action_high, cfg.Planner());
  const FewShotConfig fs = cfg.FewShot();
  const FewShotResult r = FewShotLoop(fs, *env, data, params, policy);
  SaveDynamics(path, params, cfg.Hash());
  Emit({{"command", "few-shot"},
        {"env", data.env},
        {"virtual_steps", r.log.virtual_steps},
        {"real_steps", r.log.real_steps},
        {"updates", r.log.updates},
        {"oracle_calls", r.log.oracle_calls},
        {"final_update_loss", r.log.update_loss.empty()
                                  ? json(nullptr)
                                  : json(r.log.update_loss.back())},
        {"config_hash", HexHash(cfg.Hash())},
        {"out", path}},
       "", out);
  return kExitOk;
}

int Dispatch(const std::string& name, const RunConfig& cfg,
             std::ostream& out) {
  if (name == "gen-data") return GenData(cfg, out);
  if (name == "train") return Train(cfg, out);
  if (name == "benchmark") return Benchmark(cfg, out);
  if (name == "plan") return Plan(cfg, out);
  if (name == "lce") return Lce(cfg, out);
  if (name == "fit-flow") return FitFlowCmd(cfg, out);
  return FewShot(cfg, out);
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"dynsim: learned continuous-time dynamics toolkit"};
  app.require_subcommand(1);
  struct Bound {
    CLI::App* app;
    std::string config;
    std::vector<std::pair<Flag, std::string>> values;
  };
  // Stable addresses for CLI11's value references.
  std::vector<std::unique_ptr<Bound>> bound;
  for (const Command& c : Commands()) {
    auto b = std::make_unique<Bound>();
    b->app = app.add_subcommand(c.name, c.help);
    b->app->add_option("--config", b->config, "JSON run configuration");
    std::vector<Flag> flags = CommonFlags();
    flags.insert(flags.end(), c.flags.begin(), c.flags.end());
    b->values.reserve(flags.size());
    for (const Flag& f : flags) {
      b->values.emplace_back(f, std::string());
      b->app->add_option(f.name, b->values.back().second, f.help);
    }
    bound.push_back(std::move(b));
  }

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitConfig;
    }
    for (const auto& b : bound) {
      if (!b->app->parsed()) continue;
      RunConfig cfg = b->config.empty() ? RunConfig()
                                        : RunConfig::FromFile(b->config);
      for (const auto& [flag, text] : b->values) {
        if (b->app->count(flag.name) > 0) {
          cfg.Set(flag.pointer, ParseFlagValue(flag, text));
        }
      }
      SetThreadCount(static_cast<int>(cfg.Int("/threads", 0)));
      return Dispatch(b->app->get_name(), cfg, out);
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const IntegrationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const TrainingFault& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DensityFault& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace dynsim
