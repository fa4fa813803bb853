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

#include "dynsim/cli/config.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dynsim/common.h"

namespace dynsim {
namespace {

using nlohmann::json;

const std::set<std::string>& ScalarKeys() {
  static const std::set<std::string> k = {"env", "seed", "threads", "out"};
  return k;
}

const std::map<std::string, std::set<std::string>>& SectionKeys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"data",
       {"path", "val_path", "n_traj", "steps", "mode", "sampler", "rate",
        "n_val", "policy_noise"}},
      {"model", {"path", "init", "kind", "size", "correctors"}},
      {"train",
       {"mode", "segment_length", "segment_length_max", "batch_size",
        "stage_steps", "grad_path", "lr", "beta1", "beta2", "eps",
        "cosine_decay", "lr_final_fraction", "clip_norm", "noise_sigma",
        "normalized_loss", "val_every", "val_horizons", "n_val_windows",
        "checkpoint_every", "checkpoint_dir", "log_path", "warm_in"}},
      {"integrator",
       {"solver", "rtol", "atol", "h_init", "h_min", "h_max", "max_steps",
        "rk4_substeps"}},
      {"adjoint", {"rtol", "atol", "h_init", "h_min", "h_max", "max_steps"}},
      {"benchmark", {"horizons", "n_eval", "warm_in"}},
      {"planner",
       {"horizon", "population", "elite_fraction", "iterations", "smoothing",
        "min_std", "retain_elites", "solver", "rk4_substeps", "rtol", "atol"}},
      {"zero_shot",
       {"episodes", "episode_steps", "oracle_reference", "flow", "tau",
        "alpha"}},
      {"flow", {"layers", "hidden", "scale_bound", "steps", "batch_size", "lr"}},
      {"lce", {"delta", "steps", "n_traj", "action"}},
      {"few_shot",
       {"virtual_steps", "virtual_per_collect", "real_per_collect",
        "update_every", "grad_steps_per_update", "virtual_episode_steps",
        "real_episode_steps", "collect"}},
  };
  return k;
}

Solver ParseSolver(const std::string& s) {
  if (s == "dopri5") return Solver::kDopri5;
  if (s == "rk4") return Solver::kRk4;
  throw ConfigError("unknown solver '" + s + "' (dopri5 | rk4)");
}

}  // namespace

RunConfig::RunConfig(json doc) : doc_(std::move(doc)) { Check(doc_); }

RunConfig RunConfig::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return RunConfig(std::move(doc));
}

void RunConfig::Check(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (ScalarKeys().count(it.key())) continue;
    auto sec = SectionKeys().find(it.key());
    if (sec == SectionKeys().end())
      throw ConfigError("unknown config key '" + it.key() + "'");
    if (!it->is_object())
      throw ConfigError("config section '" + it.key() + "' must be an object");
    for (auto kt = it->begin(); kt != it->end(); ++kt) {
      if (!sec->second.count(kt.key()))
        throw ConfigError("unknown config key '" + it.key() + "." + kt.key() +
                          "'");
    }
  }
}

void RunConfig::Set(const std::string& pointer, json value) {
  json next = doc_;
  next[json::json_pointer(pointer)] = std::move(value);
  Check(next);
  doc_ = std::move(next);
}

std::uint64_t RunConfig::Hash() const {
  // Output locations and worker count do not change results.
  json canonical = doc_;
  canonical.erase("out");
  canonical.erase("threads");
  if (canonical.contains("train")) {
    canonical["train"].erase("log_path");
    canonical["train"].erase("checkpoint_dir");
  }
  return Fnv1a(canonical.dump());
}

bool RunConfig::Has(const std::string& pointer) const {
  return doc_.contains(json::json_pointer(pointer));
}

template <typename T>
T RunConfig::Get(const std::string& pointer, T def) const {
  const json::json_pointer p(pointer);
  if (!doc_.contains(p)) return def;
  try {
    return doc_.at(p).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config value " + pointer + ": " + e.what());
  }
}

std::string RunConfig::String(const std::string& p, const std::string& d) const {
  return Get<std::string>(p, d);
}

std::string RunConfig::RequireString(const std::string& p) const {
  if (!Has(p)) throw ConfigError("missing required setting " + p);
  return Get<std::string>(p, "");
}

std::int64_t RunConfig::Int(const std::string& p, std::int64_t d) const {
  return Get<std::int64_t>(p, d);
}

std::size_t RunConfig::Size(const std::string& p, std::size_t d) const {
  const std::int64_t v = Get<std::int64_t>(p, static_cast<std::int64_t>(d));
  if (v < 0) throw ConfigError("config value " + p + " must be >= 0");
  return static_cast<std::size_t>(v);
}

double RunConfig::Double(const std::string& p, double d) const {
  return Get<double>(p, d);
}

bool RunConfig::Bool(const std::string& p, bool d) const {
  return Get<bool>(p, d);
}

std::vector<std::size_t> RunConfig::Sizes(const std::string& p,
                                          std::vector<std::size_t> d) const {
  return Get<std::vector<std::size_t>>(p, std::move(d));
}

std::vector<double> RunConfig::Doubles(const std::string& p,
                                       std::vector<double> d) const {
  return Get<std::vector<double>>(p, std::move(d));
}

RolloutOptions RunConfig::Rollout() const {
  RolloutOptions r;
  r.solver = ParseSolver(String("/integrator/solver", "dopri5"));
  IntegratorConfig& c = r.integrator;
  c.rtol = Double("/integrator/rtol", c.rtol);
  c.atol = Double("/integrator/atol", c.atol);
  c.h_init = Double("/integrator/h_init", c.h_init);
  c.h_min = Double("/integrator/h_min", c.h_min);
  c.h_max = Double("/integrator/h_max", c.h_max);
  c.max_steps = Size("/integrator/max_steps", c.max_steps);
  r.rk4_substeps =
      static_cast<int>(Int("/integrator/rk4_substeps", r.rk4_substeps));
  c.Validate();
  if (r.rk4_substeps < 1) throw ConfigError("rk4_substeps must be >= 1");
  return r;
}

IntegratorConfig RunConfig::Adjoint() const {
  IntegratorConfig c;
  c.rtol = Double("/adjoint/rtol", c.rtol);
  c.atol = Double("/adjoint/atol", c.atol);
  c.h_init = Double("/adjoint/h_init", c.h_init);
  c.h_min = Double("/adjoint/h_min", c.h_min);
  c.h_max = Double("/adjoint/h_max", c.h_max);
  c.max_steps = Size("/adjoint/max_steps", c.max_steps);
  c.Validate();
  return c;
}

TrainConfig RunConfig::Train() const {
  TrainConfig t;
  t.segment_length = Size("/train/segment_length", t.segment_length);
  t.segment_length_max = Size("/train/segment_length_max",
                              std::max(t.segment_length_max, t.segment_length));
  t.batch_size = Size("/train/batch_size", t.batch_size);
  t.stage_steps = Sizes("/train/stage_steps", t.stage_steps);
  t.grad_path = ParseGradPath(String("/train/grad_path", "backprop_steps"));
  t.adam.lr = Double("/train/lr", t.adam.lr);
  t.adam.beta1 = Double("/train/beta1", t.adam.beta1);
  t.adam.beta2 = Double("/train/beta2", t.adam.beta2);
  t.adam.eps = Double("/train/eps", t.adam.eps);
  t.cosine_decay = Bool("/train/cosine_decay", t.cosine_decay);
  t.lr_final_fraction = Double("/train/lr_final_fraction", t.lr_final_fraction);
  t.clip_norm = Double("/train/clip_norm", t.clip_norm);
  t.noise_sigma = Double("/train/noise_sigma", t.noise_sigma);
  t.normalized_loss = Bool("/train/normalized_loss", t.normalized_loss);
  t.val_every = Size("/train/val_every", t.val_every);
  t.val_horizons = Sizes("/train/val_horizons", t.val_horizons);
  t.n_val_windows = Size("/train/n_val_windows", t.n_val_windows);
  t.checkpoint_every = Size("/train/checkpoint_every", t.checkpoint_every);
  t.checkpoint_dir = String("/train/checkpoint_dir", t.checkpoint_dir);
  t.log_path = String("/train/log_path", t.log_path);
  t.warm_in = Size("/train/warm_in", t.warm_in);
  t.seed = Seed();
  t.rollout = Rollout();
  t.adjoint = Adjoint();
  t.config_hash = Hash();
  return t;
}

BenchmarkOptions RunConfig::Benchmark() const {
  BenchmarkOptions b;
  b.horizons = Sizes("/benchmark/horizons", b.horizons);
  b.n_eval = Size("/benchmark/n_eval", b.n_eval);
  b.warm_in = Size("/benchmark/warm_in", b.warm_in);
  b.seed = Seed();
  b.rollout = Rollout();
  return b;
}

PlannerConfig RunConfig::Planner() const {
  PlannerConfig p;
  p.horizon = Size("/planner/horizon", p.horizon);
  p.population = Size("/planner/population", p.population);
  p.elite_fraction = Double("/planner/elite_fraction", p.elite_fraction);
  p.iterations = Size("/planner/iterations", p.iterations);
  p.smoothing = Double("/planner/smoothing", p.smoothing);
  p.min_std = Double("/planner/min_std", p.min_std);
  p.retain_elites = Bool("/planner/retain_elites", p.retain_elites);
  p.rollout.solver = ParseSolver(String("/planner/solver", "rk4"));
  p.rollout.rk4_substeps =
      static_cast<int>(Int("/planner/rk4_substeps", p.rollout.rk4_substeps));
  p.rollout.integrator.rtol = Double("/planner/rtol", 1e-4);
  p.rollout.integrator.atol = Double("/planner/atol", 1e-4);
  p.seed = Seed();
  p.Validate();
  return p;
}

FlowConfig RunConfig::Flow() const {
  FlowConfig f;
  f.layers = Size("/flow/layers", f.layers);
  f.hidden = Size("/flow/hidden", f.hidden);
  f.scale_bound = Double("/flow/scale_bound", f.scale_bound);
  f.steps = Size("/flow/steps", f.steps);
  f.batch_size = Size("/flow/batch_size", f.batch_size);
  f.adam.lr = Double("/flow/lr", f.adam.lr);
  f.seed = Seed();
  f.Validate();
  return f;
}

LceConfig RunConfig::Lce() const {
  LceConfig l;
  l.delta = Double("/lce/delta", l.delta);
  l.steps = Size("/lce/steps", l.steps);
  l.n_traj = Size("/lce/n_traj", l.n_traj);
  l.seed = Seed();
  l.rollout = Rollout();
  if (!(l.delta > 0)) throw ConfigError("lce delta must be > 0");
  return l;
}

FewShotConfig RunConfig::FewShot() const {
  FewShotConfig f;
  f.virtual_steps = Size("/few_shot/virtual_steps", f.virtual_steps);
  f.virtual_per_collect =
      Size("/few_shot/virtual_per_collect", f.virtual_per_collect);
  f.real_per_collect = Size("/few_shot/real_per_collect", f.real_per_collect);
  f.update_every = Size("/few_shot/update_every", f.update_every);
  f.grad_steps_per_update =
      Size("/few_shot/grad_steps_per_update", f.grad_steps_per_update);
  f.virtual_episode_steps =
      Size("/few_shot/virtual_episode_steps", f.virtual_episode_steps);
  f.real_episode_steps =
      Size("/few_shot/real_episode_steps", f.real_episode_steps);
  f.collect = Bool("/few_shot/collect", f.collect);
  f.train = Train();
  f.seed = Seed();
  f.Validate();
  return f;
}

}  // namespace dynsim
