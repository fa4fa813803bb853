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

// State-density model: a standardization, a learned elementwise affine map
// and K affine coupling layers with alternating masks, over a standard
// Gaussian base.
//
// Normalizing direction (state -> base), applied in this order:
//   u = (s - mean) / std
//   x = (u - b) * exp(-a)
//   per coupling layer with mask m:
//     y_m = x_m,  y_~m = (x_~m - t(x * m)) * exp(-scale(x * m))
//   where scale(.) = bound * tanh(S(.)) keeps every layer invertible.
// log p(s) = log N(z; 0, I) + log|det dz/ds|.

#ifndef DYNSIM_CONTROL_FLOW_H_
#define DYNSIM_CONTROL_FLOW_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dynsim/nn/adam.h"
#include "dynsim/nn/network.h"
#include "dynsim/parallel/execution.h"

namespace dynsim {

struct FlowConfig {
  std::size_t layers = 6;
  std::size_t hidden = 32;
  double scale_bound = 2.0;
  std::size_t steps = 2000;
  std::size_t batch_size = 256;
  AdamConfig adam;
  std::uint64_t seed = 0;
  Execution exec = Execution::kParallel;

  void Validate() const;
};

struct FlowParams {
  std::size_t dim = 0;
  double scale_bound = 2.0;
  std::vector<double> mean, std;             // standardization
  MlpShape net;                               // dim -> hidden -> hidden -> dim
  std::vector<std::vector<std::uint8_t>> masks;  // 1 = passed through
  // Layout: affine a (dim), affine b (dim), then per layer the scale net
  // followed by the shift net.
  std::vector<double> values;

  std::size_t layer_count() const { return masks.size(); }
  std::span<double> affine_log_scale();
  std::span<double> affine_shift();
  std::span<double> scale_net(std::size_t k);
  std::span<double> shift_net(std::size_t k);
  std::span<const double> affine_log_scale() const;
  std::span<const double> affine_shift() const;
  std::span<const double> scale_net(std::size_t k) const;
  std::span<const double> shift_net(std::size_t k) const;
};

// Identity flow (zero affine, zero-output nets) with unit standardization.
FlowParams MakeFlow(std::size_t dim, std::size_t layers, std::size_t hidden,
                    double scale_bound, Rng& rng);

// s -> z and the log-determinant of dz/ds. Throws DensityFault on non-finite
// intermediates.
std::vector<double> FlowToBase(const FlowParams& f, std::span<const double> s,
                               double* log_det);
// z -> s, the exact inverse; log_det (optional) receives log|det ds/dz|.
std::vector<double> FlowFromBase(const FlowParams& f, std::span<const double> z,
                                 double* log_det = nullptr);

double FlowLogDensity(const FlowParams& f, std::span<const double> s);

// Gradient of log p(s) with respect to f.values, accumulated into grad.
double FlowLogDensityGrad(const FlowParams& f, std::span<const double> s,
                          std::span<double> grad);

// Maximum likelihood on `states` (n x dim, row-major), standardized by their
// own moments. Requires n >= 1000. Raises TrainingFault on divergence.
FlowParams FitFlow(std::span<const double> states, std::size_t dim,
                   const FlowConfig& cfg);

void SaveFlow(const std::string& path, const FlowParams& f,
              std::uint64_t config_hash);
FlowParams LoadFlow(const std::string& path);

}  // namespace dynsim

#endif  // DYNSIM_CONTROL_FLOW_H_
