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

// Zero-order-hold rollouts of controlled systems ds/dt = f(s, a) over a
// control grid. The integrator restarts at every grid boundary so no step
// straddles an action switch; the adaptive step-size suggestion carries over.

#ifndef DYNSIM_ODE_ROLLOUT_H_
#define DYNSIM_ODE_ROLLOUT_H_

#include <cstddef>
#include <span>
#include <vector>

#include "dynsim/dynamics/model.h"
#include "dynsim/ode/integrator.h"

namespace dynsim {

class ControlledSystem {
 public:
  virtual ~ControlledSystem() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual void Derivative(std::span<const double> s, std::span<const double> a,
                          std::span<double> ds) const = 0;
};

class DifferentiableSystem : public ControlledSystem {
 public:
  virtual std::size_t param_count() const = 0;
  // Accumulates u^T df/ds and u^T df/dtheta (either span may be empty).
  virtual void Vjp(std::span<const double> s, std::span<const double> a,
                   std::span<const double> u, std::span<double> grad_s,
                   std::span<double> grad_theta) const = 0;
};

// Binds a constant action to a controlled system.
class HeldActionField : public DifferentiableField {
 public:
  HeldActionField(const ControlledSystem& sys, std::span<const double> a);

  std::size_t dim() const override { return sys_.state_dim(); }
  void Eval(double t, std::span<const double> y,
            std::span<double> dy) const override;
  std::size_t param_count() const override;
  // Requires a DifferentiableSystem.
  void Vjp(double t, std::span<const double> y, std::span<const double> u,
           std::span<double> grad_y,
           std::span<double> grad_theta) const override;

 private:
  const ControlledSystem& sys_;
  std::span<const double> a_;
};

// The learned dynamics as a controlled system. The mask selects which
// parameter groups receive gradients.
class ModelSystem : public DifferentiableSystem {
 public:
  explicit ModelSystem(const DynamicsParams& p, GradMask mask = {})
      : p_(p), mask_(std::move(mask)) {}

  std::size_t state_dim() const override { return p_.arch.dims.state(); }
  std::size_t action_dim() const override { return p_.arch.dims.da; }
  std::size_t param_count() const override { return p_.ParamCount(); }
  void Derivative(std::span<const double> s, std::span<const double> a,
                  std::span<double> ds) const override {
    FullDerivative(p_, s, a, ds);
  }
  void Vjp(std::span<const double> s, std::span<const double> a,
           std::span<const double> u, std::span<double> grad_s,
           std::span<double> grad_theta) const override {
    DynamicsVjp(p_, s, a, u, grad_theta, grad_s, {}, mask_);
  }

 private:
  const DynamicsParams& p_;
  GradMask mask_;
};

enum class Solver { kDopri5, kRk4 };

struct RolloutOptions {
  Solver solver = Solver::kDopri5;
  IntegratorConfig integrator;  // h_init <= 0 selects dt / 10
  int rk4_substeps = 20;        // fixed steps per control interval
  bool record = false;          // keep per-interval step records
};

struct Rollout {
  std::vector<std::vector<double>> states;     // n + 1 grid states
  std::vector<std::vector<StepRecord>> tape;   // per interval, if recorded
  IntegrationStats stats;
};

// actions: n x action_dim, row-major. Throws IntegrationError on failure.
Rollout IntegrateControlled(const ControlledSystem& sys,
                            std::span<const double> s0,
                            std::span<const double> actions, double dt,
                            const RolloutOptions& opts);

// dl_dstates: (n + 1) x state_dim loss cotangents at the grid states (row 0
// is added to the returned initial-state gradient). Both accumulate
// dL/dtheta into grad_theta and return dL/ds0.
std::vector<double> BackpropRollout(const DifferentiableSystem& sys,
                                    const Rollout& rollout,
                                    std::span<const double> actions,
                                    std::span<const double> dl_dstates,
                                    std::span<double> grad_theta);

// Continuous adjoint per interval; the backward state is reset to the
// recorded grid state at each boundary.
std::vector<double> AdjointRollout(const DifferentiableSystem& sys,
                                   const Rollout& rollout,
                                   std::span<const double> actions, double dt,
                                   std::span<const double> dl_dstates,
                                   const IntegratorConfig& cfg,
                                   std::span<double> grad_theta,
                                   IntegrationStats* stats = nullptr);

}  // namespace dynsim

#endif  // DYNSIM_ODE_ROLLOUT_H_
