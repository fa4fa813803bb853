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

// Feed-forward networks with hand-written forward and vector-Jacobian passes.
//
// Parameters live in one flat array per network so that optimizers,
// checkpoints and ODE adjoints can treat them as a single vector. A dense
// layer occupies `out * in` weights (row-major, out x in) followed by `out`
// biases. Networks are described by shapes; the kernels take the shape plus
// a span over the parameter storage and never allocate on the heap in steady
// state (scratch space is thread-local).

#ifndef DYNSIM_NN_NETWORK_H_
#define DYNSIM_NN_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dynsim/common.h"
#include "dynsim/nn/matrix.h"

namespace dynsim {

enum class Activation : std::uint8_t { kIdentity = 0, kTanh = 1, kRelu = 2 };

const char* ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

// A named slice of a flat parameter array.
struct TensorSpec {
  std::string name;
  std::vector<std::size_t> dims;
  std::size_t offset = 0;
  std::size_t size() const;
};

// Read/write window onto one dense layer inside a flat parameter array.
struct DenseView {
  std::size_t in = 0;
  std::size_t out = 0;
  std::span<double> weight;  // out x in, row-major
  std::span<double> bias;    // out

  double& w(std::size_t o, std::size_t i) { return weight[o * in + i]; }
  Matrix WeightMatrix() const;
};

// Multi-layer perceptron: widths = {input, hidden..., output}; activation i
// follows layer i for every layer except the last.
struct MlpShape {
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;

  // input -> hidden, hidden_blocks x (hidden -> hidden), hidden -> output.
  static MlpShape Uniform(std::size_t input, std::size_t hidden,
                          std::size_t output, std::size_t hidden_blocks,
                          Activation activation);

  std::size_t layer_count() const { return widths.size() - 1; }
  std::size_t input() const { return widths.front(); }
  std::size_t output() const { return widths.back(); }
  std::size_t ParamCount() const;
  std::vector<TensorSpec> Tensors() const;  // "layer{i}.weight", ".bias"
  void Validate() const;
  bool operator==(const MlpShape&) const = default;
};

// Residual network: h = act(W_in x + b_in); per block
// h <- h + W2 act(W1 h + b1) + b2; y = W_out h + b_out.
struct ResNetShape {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::size_t output = 0;
  std::size_t blocks = 1;
  Activation activation = Activation::kTanh;

  std::size_t ParamCount() const;
  // "input.*", "block{j}.fc1.*", "block{j}.fc2.*", "output.*"
  std::vector<TensorSpec> Tensors() const;
  void Validate() const;
  bool operator==(const ResNetShape&) const = default;
};

// Owning parameter holders.
struct MlpParams {
  MlpShape shape;
  std::vector<double> values;

  DenseView layer(std::size_t i);
};

struct ResNetParams {
  ResNetShape shape;
  std::vector<double> values;

  DenseView input_layer();
  DenseView block_first(std::size_t j);
  DenseView block_second(std::size_t j);
  DenseView output_layer();
};

// Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) weights, zero biases. With
// zero_output the final layer weights are zero too, so the network starts as
// the zero function.
void InitMlp(const MlpShape& shape, std::span<double> params, Rng& rng);
void InitResNet(const ResNetShape& shape, std::span<double> params, Rng& rng,
                bool zero_output = false);
MlpParams MakeMlp(const MlpShape& shape, Rng& rng);
ResNetParams MakeResNet(const ResNetShape& shape, Rng& rng,
                        bool zero_output = false);

// Raw kernels. VJP kernels accumulate (+=) into grad_params and grad_x;
// either may be empty to skip that output.
void MlpForward(const MlpShape& shape, std::span<const double> params,
                std::span<const double> x, std::span<double> y);
void MlpVjp(const MlpShape& shape, std::span<const double> params,
            std::span<const double> x, std::span<const double> cotangent,
            std::span<double> grad_params, std::span<double> grad_x);
void ResNetForward(const ResNetShape& shape, std::span<const double> params,
                   std::span<const double> x, std::span<double> y);
void ResNetVjp(const ResNetShape& shape, std::span<const double> params,
               std::span<const double> x, std::span<const double> cotangent,
               std::span<double> grad_params, std::span<double> grad_x);

// Checked convenience wrappers.
struct NetVjp {
  std::vector<double> grad_params;
  std::vector<double> grad_x;
};

std::vector<double> Forward(const MlpParams& net, std::span<const double> x);
std::vector<double> Forward(const ResNetParams& net,
                            std::span<const double> x);
NetVjp Vjp(const MlpParams& net, std::span<const double> x,
           std::span<const double> cotangent);
NetVjp Vjp(const ResNetParams& net, std::span<const double> x,
           std::span<const double> cotangent);

}  // namespace dynsim

#endif  // DYNSIM_NN_NETWORK_H_
