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

// Analytic ground-truth environments.
//
//   pendulum      m = l = 1, g = 9.81, viscous damping 0.1, torque in [-2, 2];
//                 theta = 0 hangs straight down.
//   cartpole      cart 1.0 kg, point-mass pole 0.1 kg at 0.5 m, force in
//                 [-10, 10]; theta = 0 is upright, pole unactuated.
//   reacher2      planar two-link arm, links 0.5 m with 1 kg point masses at
//                 the link tips, joint damping 0.2, torques in [-1, 1], no
//                 gravity.
//   acrobot       two uniform 1 m, 1 kg rods (com at 0.5 m, I = 1/12),
//                 g = 9.81, elbow torque in [-1, 1], no damping by default;
//                 theta = 0 hangs down. Chaotic under zero torque.
//   wallpendulum  pendulum whose joint is blocked by a wall at angle
//                 kWallAngle. Contact is a one-sided spring-damper
//                 (kWallStiffness, kWallDamping) acting on either face, so the
//                 angle lives in [kWallAngle - 2 pi, kWallAngle] up to the
//                 compliance bound kWallPenetrationBound.
//
// All envs use a control interval dt = 0.05 s. States are (q, qdot) in
// radians / metres and per-second rates.

#ifndef DYNSIM_ENVS_ENV_H_
#define DYNSIM_ENVS_ENV_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynsim/common.h"
#include "dynsim/data/segment.h"
#include "dynsim/dynamics/model.h"
#include "dynsim/ode/rollout.h"

namespace dynsim {

inline constexpr double kGravity = 9.81;
inline constexpr double kEnvDt = 0.05;
inline constexpr double kWallAngle = 0.4;
inline constexpr double kWallStiffness = 5000.0;
inline constexpr double kWallDamping = 10.0;
inline constexpr double kWallPenetrationBound = 0.2;
inline constexpr int kOracleSubsteps = 20;

struct EnvSpec {
  std::string name;
  StateDims dims;
  double dt = kEnvDt;
  std::vector<double> action_low, action_high;
  std::vector<double> init_low, init_high;  // uniform initial-state box
  // Position coordinates that are angles on the circle (the wall pendulum's
  // angle is not: its two wall faces differ by 2 pi).
  std::vector<std::uint8_t> periodic;
};

struct EnvOptions {
  std::optional<double> damping;  // overrides the env's joint damping
};

class Env : public ControlledSystem {
 public:
  explicit Env(EnvSpec spec) : spec_(std::move(spec)) {}

  const EnvSpec& spec() const { return spec_; }
  std::size_t state_dim() const override { return spec_.dims.state(); }
  std::size_t action_dim() const override { return spec_.dims.da; }

  // Exact derivative; every call increments the global oracle counter.
  void Derivative(std::span<const double> s, std::span<const double> a,
                  std::span<double> ds) const final;

  // Total mechanical energy (kinetic + potential, contact spring included).
  virtual double Energy(std::span<const double> s) const = 0;

  std::vector<double> SampleInitialState(Rng& rng) const;
  std::vector<double> ClampAction(std::span<const double> a) const;

 protected:
  virtual void Eval(std::span<const double> s, std::span<const double> a,
                    std::span<double> ds) const = 0;

 private:
  EnvSpec spec_;
};

std::unique_ptr<Env> MakeEnv(const std::string& name,
                             const EnvOptions& options = {});
const std::vector<std::string>& EnvNames();

// Fingerprint of an env's spec and physical constants (the latter through
// its derivative at fixed probe points; counts as oracle calls).
std::uint64_t EnvConstantsHash(const Env& env);

// Process-wide count of Env::Derivative calls.
std::int64_t OracleCallCount();
void ResetOracleCallCount();

// Action sequences.
enum class SamplerMode { kUniformPerStep, kPoissonHold };

struct ActionSamplerSpec {
  SamplerMode mode = SamplerMode::kUniformPerStep;
  double rate = 2.0;  // switches per second (poisson_hold)
};

SamplerMode ParseSamplerMode(const std::string& name);

// n_steps x da actions within [low, high]. Poisson holds draw durations from
// Exp(rate) rounded up to whole control steps.
std::vector<double> SampleActions(const ActionSamplerSpec& sampler,
                                  std::span<const double> low,
                                  std::span<const double> high,
                                  std::size_t n_steps, double dt, Rng& rng);

// Ground-truth rollout: RK4 with kOracleSubsteps substeps per interval.
// actions holds n_steps rows. Integration failures are rethrown with the
// failing step index in the message.
TrajectorySegment GenerateTrajectory(const Env& env, std::span<const double> s0,
                                     std::span<const double> actions,
                                     std::size_t n_steps,
                                     SourceTag tag = SourceTag::kRandom);

}  // namespace dynsim

#endif  // DYNSIM_ENVS_ENV_H_
