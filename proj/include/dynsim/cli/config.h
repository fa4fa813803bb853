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

// Run configuration: one JSON document whose sections mirror the library
// configs. Unknown sections or keys are rejected; missing keys take the
// library defaults.
//
//   {
//     "env": "pendulum", "seed": 0, "threads": 0, "out": "...",
//     "data":       {path, val_path, n_traj, steps, mode, sampler, rate,
//                    n_val, policy_noise},
//     "model":      {path, init, kind, size, correctors},
//     "train":      {mode, segment_length, segment_length_max, batch_size,
//                    stage_steps, grad_path, lr, beta1, beta2, eps,
//                    cosine_decay, lr_final_fraction, clip_norm, noise_sigma,
//                    normalized_loss, val_every, val_horizons, n_val_windows,
//                    checkpoint_every, checkpoint_dir, log_path, warm_in},
//     "integrator": {solver, rtol, atol, h_init, h_min, h_max, max_steps,
//                    rk4_substeps},
//     "adjoint":    {rtol, atol, h_init, h_min, h_max, max_steps},
//     "benchmark":  {horizons, n_eval, warm_in},
//     "planner":    {horizon, population, elite_fraction, iterations,
//                    smoothing, min_std, retain_elites, solver, rk4_substeps,
//                    rtol, atol},
//     "zero_shot":  {episodes, episode_steps, oracle_reference, flow, tau,
//                    alpha},
//     "flow":       {layers, hidden, scale_bound, steps, batch_size, lr},
//     "lce":        {delta, steps, n_traj, action},
//     "few_shot":   {virtual_steps, virtual_per_collect, real_per_collect,
//                    update_every, grad_steps_per_update,
//                    virtual_episode_steps, real_episode_steps, collect}
//   }

#ifndef DYNSIM_CLI_CONFIG_H_
#define DYNSIM_CLI_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dynsim/control/flow.h"
#include "dynsim/control/planner.h"
#include "dynsim/data/benchmark.h"
#include "dynsim/data/lce.h"
#include "dynsim/train/few_shot.h"
#include "dynsim/train/trainer.h"
#include "json.hpp"

namespace dynsim {

class RunConfig {
 public:
  RunConfig() : doc_(nlohmann::json::object()) {}
  // Throws ConfigError on unknown keys or malformed JSON.
  explicit RunConfig(nlohmann::json doc);
  static RunConfig FromFile(const std::string& path);

  // Sets a value by JSON pointer ("/train/lr"), re-validating the key.
  void Set(const std::string& pointer, nlohmann::json value);

  const nlohmann::json& doc() const { return doc_; }
  // FNV-1a of the canonical (sorted-key) serialization, without the output
  // paths and "threads".
  std::uint64_t Hash() const;

  bool Has(const std::string& pointer) const;
  std::string String(const std::string& pointer, const std::string& def) const;
  std::string RequireString(const std::string& pointer) const;
  std::int64_t Int(const std::string& pointer, std::int64_t def) const;
  std::size_t Size(const std::string& pointer, std::size_t def) const;
  double Double(const std::string& pointer, double def) const;
  bool Bool(const std::string& pointer, bool def) const;
  std::vector<std::size_t> Sizes(const std::string& pointer,
                                 std::vector<std::size_t> def) const;
  std::vector<double> Doubles(const std::string& pointer,
                              std::vector<double> def) const;

  std::uint64_t Seed() const { return static_cast<std::uint64_t>(Int("/seed", 0)); }
  RolloutOptions Rollout() const;
  IntegratorConfig Adjoint() const;
  TrainConfig Train() const;
  BenchmarkOptions Benchmark() const;
  PlannerConfig Planner() const;
  FlowConfig Flow() const;
  LceConfig Lce() const;
  FewShotConfig FewShot() const;

 private:
  static void Check(const nlohmann::json& doc);
  template <typename T>
  T Get(const std::string& pointer, T def) const;

  nlohmann::json doc_;
};

}  // namespace dynsim

#endif  // DYNSIM_CLI_CONFIG_H_
