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

// Explicit Runge-Kutta integration with recorded steps and two gradient
// paths: a reverse sweep through the recorded stages (exact for the computed
// discrete map) and the continuous adjoint, which integrates the augmented
// system (z, alpha, g_theta) backward in time.

#ifndef DYNSIM_ODE_INTEGRATOR_H_
#define DYNSIM_ODE_INTEGRATOR_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace dynsim {

// dy/dt = f(t, y).
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual std::size_t dim() const = 0;
  virtual void Eval(double t, std::span<const double> y,
                    std::span<double> dy) const = 0;
};

// A vector field with parameters theta and a vector-Jacobian product.
class DifferentiableField : public VectorField {
 public:
  virtual std::size_t param_count() const = 0;
  // Accumulates u^T df/dy into grad_y and u^T df/dtheta into grad_theta;
  // either span may be empty.
  virtual void Vjp(double t, std::span<const double> y,
                   std::span<const double> u, std::span<double> grad_y,
                   std::span<double> grad_theta) const = 0;
};

struct IntegratorConfig {
  double rtol = 1e-6;
  double atol = 1e-6;
  double h_init = 0.0;  // <= 0 selects |t1 - t0| / 10
  double h_min = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  std::int64_t max_steps = 100000;

  void Validate() const;  // throws ConfigError
};

enum class RkMethod : std::uint8_t { kEuler, kRk4, kDopri5 };

// One accepted step: y_{n+1} = y_n + h sum_i b_i k_i. k holds the stage
// derivatives so stage inputs can be rebuilt during the reverse sweep.
struct StepRecord {
  RkMethod method = RkMethod::kDopri5;
  double t = 0.0;
  double h = 0.0;
  std::vector<double> y;
  std::vector<std::vector<double>> k;
};

struct IntegrationStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t f_evals = 0;

  IntegrationStats& operator+=(const IntegrationStats& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    f_evals += o.f_evals;
    return *this;
  }
};

struct IntegrationResult {
  std::vector<double> y;
  std::vector<StepRecord> records;  // empty unless requested
  IntegrationStats stats;
  double h_next = 0.0;  // last step-size suggestion (adaptive only)
};

// Adaptive Dormand-Prince 5(4) with PI step control. Accepts a step when
// max_i |err_i| / (atol + rtol * max(|y_i|, |y_new_i|)) <= 1. t1 < t0
// integrates backward. Throws IntegrationError on step underflow, step-count
// overflow or a non-finite accepted state.
IntegrationResult Dopri5Integrate(const VectorField& f,
                                  std::span<const double> y0, double t0,
                                  double t1, const IntegratorConfig& cfg,
                                  bool record = false);

// n_steps equal steps of the given method (no error control).
IntegrationResult FixedStepIntegrate(const VectorField& f, RkMethod method,
                                     std::span<const double> y0, double t0,
                                     double t1, std::int64_t n_steps,
                                     bool record = false);

// Classical RK4 trajectory: n_steps + 1 states including y0.
std::vector<std::vector<double>> Rk4Integrate(const VectorField& f,
                                              std::span<const double> y0,
                                              double t0, double dt,
                                              std::int64_t n_steps);

// Reverse sweep through records from one forward pass. Accumulates
// dL/dtheta into grad_theta (may be empty) and returns dL/dy0.
std::vector<double> BackpropThroughSteps(const DifferentiableField& f,
                                         const std::vector<StepRecord>& records,
                                         std::span<const double> dl_dy1,
                                         std::span<double> grad_theta);

// Continuous adjoint over [t0, t1] given the forward end state y1: solves
// the augmented system backward from t1 to t0 with DOPRI5 under cfg.
// Accumulates into grad_theta and returns dL/dy0.
std::vector<double> AdjointBackward(const DifferentiableField& f,
                                    std::span<const double> y1, double t0,
                                    double t1, std::span<const double> dl_dy1,
                                    const IntegratorConfig& cfg,
                                    std::span<double> grad_theta,
                                    IntegrationStats* stats = nullptr);

}  // namespace dynsim

#endif  // DYNSIM_ODE_INTEGRATOR_H_
