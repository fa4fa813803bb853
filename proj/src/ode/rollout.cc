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

#include "dynsim/ode/rollout.h"

#include <algorithm>
#include <string>

#include "dynsim/common.h"

namespace dynsim {
namespace {

const DifferentiableSystem& AsDifferentiable(const ControlledSystem& sys) {
  const auto* d = dynamic_cast<const DifferentiableSystem*>(&sys);
  if (d == nullptr) throw ConfigError("system is not differentiable");
  return *d;
}

std::size_t IntervalCount(const ControlledSystem& sys,
                          std::span<const double> actions) {
  const std::size_t da = sys.action_dim();
  if (da == 0 || actions.size() % da != 0)
    throw DimensionError("action array length is not a multiple of da");
  return actions.size() / da;
}

}  // namespace

HeldActionField::HeldActionField(const ControlledSystem& sys,
                                 std::span<const double> a)
    : sys_(sys), a_(a) {
  if (a.size() != sys.action_dim()) {
    throw DimensionError("action length " + std::to_string(a.size()) +
                         " != " + std::to_string(sys.action_dim()));
  }
}

void HeldActionField::Eval(double, std::span<const double> y,
                           std::span<double> dy) const {
  sys_.Derivative(y, a_, dy);
}

std::size_t HeldActionField::param_count() const {
  return AsDifferentiable(sys_).param_count();
}

void HeldActionField::Vjp(double, std::span<const double> y,
                          std::span<const double> u, std::span<double> grad_y,
                          std::span<double> grad_theta) const {
  AsDifferentiable(sys_).Vjp(y, a_, u, grad_y, grad_theta);
}

Rollout IntegrateControlled(const ControlledSystem& sys,
                            std::span<const double> s0,
                            std::span<const double> actions, double dt,
                            const RolloutOptions& opts) {
  if (!(dt > 0)) throw ConfigError("dt must be > 0");
  if (s0.size() != sys.state_dim()) throw DimensionError("initial state length");
  const std::size_t n = IntervalCount(sys, actions), da = sys.action_dim();
  Rollout out;
  out.states.reserve(n + 1);
  out.states.emplace_back(s0.begin(), s0.end());
  if (opts.record) out.tape.resize(n);
  IntegratorConfig cfg = opts.integrator;
  if (cfg.h_init <= 0) cfg.h_init = dt / 10.0;
  cfg.h_init = std::max(cfg.h_init, cfg.h_min);
  for (std::size_t k = 0; k < n; ++k) {
    HeldActionField field(sys, actions.subspan(k * da, da));
    const double t0 = static_cast<double>(k) * dt;
    IntegrationResult r;
    if (opts.solver == Solver::kDopri5) {
      r = Dopri5Integrate(field, out.states.back(), t0, t0 + dt, cfg,
                          opts.record);
      // Carry the step-size suggestion into the next interval.
      if (r.h_next > 0) {
        cfg.h_init = std::clamp(r.h_next, cfg.h_min, std::min(cfg.h_max, dt));
      }
    } else {
      r = FixedStepIntegrate(field, RkMethod::kRk4, out.states.back(), t0,
                             t0 + dt, opts.rk4_substeps, opts.record);
    }
    out.stats += r.stats;
    if (opts.record) out.tape[k] = std::move(r.records);
    out.states.push_back(std::move(r.y));
  }
  return out;
}

std::vector<double> BackpropRollout(const DifferentiableSystem& sys,
                                    const Rollout& rollout,
                                    std::span<const double> actions,
                                    std::span<const double> dl_dstates,
                                    std::span<double> grad_theta) {
  const std::size_t n = IntervalCount(sys, actions), da = sys.action_dim();
  const std::size_t ds = sys.state_dim();
  if (rollout.tape.size() != n) throw ConfigError("rollout was not recorded");
  if (dl_dstates.size() != (n + 1) * ds)
    throw DimensionError("dl_dstates length");
  std::vector<double> bar(dl_dstates.end() - ds, dl_dstates.end());
  for (std::size_t k = n; k-- > 0;) {
    HeldActionField field(sys, actions.subspan(k * da, da));
    bar = BackpropThroughSteps(field, rollout.tape[k], bar, grad_theta);
    for (std::size_t d = 0; d < ds; ++d) bar[d] += dl_dstates[k * ds + d];
  }
  return bar;
}

std::vector<double> AdjointRollout(const DifferentiableSystem& sys,
                                   const Rollout& rollout,
                                   std::span<const double> actions, double dt,
                                   std::span<const double> dl_dstates,
                                   const IntegratorConfig& cfg,
                                   std::span<double> grad_theta,
                                   IntegrationStats* stats) {
  const std::size_t n = IntervalCount(sys, actions), da = sys.action_dim();
  const std::size_t ds = sys.state_dim();
  if (rollout.states.size() != n + 1)
    throw DimensionError("rollout state count");
  if (dl_dstates.size() != (n + 1) * ds)
    throw DimensionError("dl_dstates length");
  IntegratorConfig back = cfg;
  if (back.h_init <= 0) back.h_init = dt / 10.0;
  std::vector<double> bar(dl_dstates.end() - ds, dl_dstates.end());
  for (std::size_t k = n; k-- > 0;) {
    HeldActionField field(sys, actions.subspan(k * da, da));
    const double t0 = static_cast<double>(k) * dt;
    bar = AdjointBackward(field, rollout.states[k + 1], t0, t0 + dt, bar, back,
                          grad_theta, stats);
    for (std::size_t d = 0; d < ds; ++d) bar[d] += dl_dstates[k * ds + d];
  }
  return bar;
}

}  // namespace dynsim
