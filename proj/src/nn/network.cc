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

#include "dynsim/nn/network.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dynsim {
namespace {

std::string Dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

// y = W x + b
inline void DenseForward(const double* w, const double* b, std::size_t in,
                         std::size_t out, const double* x, double* y) {
  for (std::size_t o = 0; o < out; ++o) {
    const double* wr = w + o * in;
    double acc = 0.0;
    for (std::size_t i = 0; i < in; ++i) acc += wr[i] * x[i];
    y[o] = acc + b[o];
  }
}

// Accumulates u x^T into gw, u into gb and W^T u into gx (null to skip).
inline void DenseVjp(const double* w, std::size_t in, std::size_t out,
                     const double* x, const double* u, double* gw, double* gb,
                     double* gx) {
  for (std::size_t o = 0; o < out; ++o) {
    const double uo = u[o];
    if (uo == 0.0) continue;
    const double* wr = w + o * in;
    if (gw != nullptr) {
      double* gwr = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) gwr[i] += uo * x[i];
      gb[o] += uo;
    }
    if (gx != nullptr) {
      for (std::size_t i = 0; i < in; ++i) gx[i] += wr[i] * uo;
    }
  }
}

inline void Activate(Activation a, double* v, std::size_t n) {
  switch (a) {
    case Activation::kIdentity:
      return;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) v[i] = std::tanh(v[i]);
      return;
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
      return;
  }
}

// g <- g * act'(.) expressed through the activation output y.
inline void ActivationBackward(Activation a, const double* y, double* g,
                               std::size_t n) {
  switch (a) {
    case Activation::kIdentity:
      return;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) g[i] *= 1.0 - y[i] * y[i];
      return;
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i)
        if (!(y[i] > 0.0)) g[i] = 0.0;
      return;
  }
}

std::span<double> Scratch(std::size_t n) {
  thread_local std::vector<double> buffer;
  if (buffer.size() < n) buffer.resize(n);
  return {buffer.data(), n};
}

DenseView MakeView(std::span<double> params, std::size_t offset,
                   std::size_t in, std::size_t out) {
  DenseView v;
  v.in = in;
  v.out = out;
  v.weight = params.subspan(offset, in * out);
  v.bias = params.subspan(offset + in * out, out);
  return v;
}

void CheckSizes(std::size_t expected_params, std::size_t got_params,
                std::size_t expected_x, std::size_t got_x, const char* what) {
  if (got_params != expected_params) {
    throw DimensionError(std::string(what) + ": parameter count " +
                         Dims(got_params, expected_params));
  }
  if (got_x != expected_x) {
    throw DimensionError(std::string(what) + ": layer 0 input width " +
                         Dims(got_x, expected_x));
  }
}

void InitDense(std::span<double> params, std::size_t offset, std::size_t in,
               std::size_t out, Rng& rng, bool zero) {
  const double bound = std::sqrt(1.0 / static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t k = 0; k < in * out; ++k)
    params[offset + k] = zero ? 0.0 : dist(rng);
  for (std::size_t k = 0; k < out; ++k) params[offset + in * out + k] = 0.0;
}

void AddDenseTensors(std::vector<TensorSpec>& out, const std::string& prefix,
                     std::size_t& offset, std::size_t in, std::size_t width) {
  out.push_back({prefix + ".weight", {width, in}, offset});
  offset += in * width;
  out.push_back({prefix + ".bias", {width}, offset});
  offset += width;
}

}  // namespace

const char* ActivationName(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "?";
}

Activation ParseActivation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + name + "'");
}

std::size_t TensorSpec::size() const {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

Matrix DenseView::WeightMatrix() const {
  return Matrix(out, in, std::vector<double>(weight.begin(), weight.end()));
}

// ---------------------------------------------------------------- MLP shape

MlpShape MlpShape::Uniform(std::size_t input, std::size_t hidden,
                           std::size_t output, std::size_t hidden_blocks,
                           Activation activation) {
  MlpShape s;
  s.widths.push_back(input);
  for (std::size_t i = 0; i <= hidden_blocks; ++i) s.widths.push_back(hidden);
  s.widths.push_back(output);
  s.activations.assign(hidden_blocks + 1, activation);
  return s;
}

std::size_t MlpShape::ParamCount() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    n += widths[l] * widths[l + 1] + widths[l + 1];
  return n;
}

std::vector<TensorSpec> MlpShape::Tensors() const {
  std::vector<TensorSpec> out;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layer_count(); ++l)
    AddDenseTensors(out, "layer" + std::to_string(l), offset, widths[l],
                    widths[l + 1]);
  return out;
}

void MlpShape::Validate() const {
  if (widths.size() < 2) throw DimensionError("mlp needs at least one layer");
  if (activations.size() != widths.size() - 2) {
    throw DimensionError("mlp activation count " +
                         Dims(activations.size(), widths.size() - 2));
  }
  for (std::size_t l = 0; l < widths.size(); ++l)
    if (widths[l] == 0)
      throw DimensionError("mlp layer " + std::to_string(l) + " has width 0");
}

// ------------------------------------------------------------- ResNet shape

std::size_t ResNetShape::ParamCount() const {
  return input * hidden + hidden + blocks * 2 * (hidden * hidden + hidden) +
         hidden * output + output;
}

std::vector<TensorSpec> ResNetShape::Tensors() const {
  std::vector<TensorSpec> out;
  std::size_t offset = 0;
  AddDenseTensors(out, "input", offset, input, hidden);
  for (std::size_t j = 0; j < blocks; ++j) {
    const std::string b = "block" + std::to_string(j);
    AddDenseTensors(out, b + ".fc1", offset, hidden, hidden);
    AddDenseTensors(out, b + ".fc2", offset, hidden, hidden);
  }
  AddDenseTensors(out, "output", offset, hidden, output);
  return out;
}

void ResNetShape::Validate() const {
  if (input == 0 || hidden == 0 || output == 0)
    throw DimensionError("resnet widths must be positive");
  if (blocks < 1) throw DimensionError("resnet needs at least one block");
}

// ------------------------------------------------------------- param views

DenseView MlpParams::layer(std::size_t i) {
  std::size_t offset = 0;
  for (std::size_t l = 0; l < i; ++l)
    offset += shape.widths[l] * shape.widths[l + 1] + shape.widths[l + 1];
  return MakeView(values, offset, shape.widths[i], shape.widths[i + 1]);
}

DenseView ResNetParams::input_layer() {
  return MakeView(values, 0, shape.input, shape.hidden);
}

DenseView ResNetParams::block_first(std::size_t j) {
  const std::size_t h = shape.hidden;
  const std::size_t offset = shape.input * h + h + j * 2 * (h * h + h);
  return MakeView(values, offset, h, h);
}

DenseView ResNetParams::block_second(std::size_t j) {
  const std::size_t h = shape.hidden;
  const std::size_t offset = shape.input * h + h + j * 2 * (h * h + h) + h * h + h;
  return MakeView(values, offset, h, h);
}

DenseView ResNetParams::output_layer() {
  const std::size_t h = shape.hidden;
  const std::size_t offset = shape.input * h + h + shape.blocks * 2 * (h * h + h);
  return MakeView(values, offset, h, shape.output);
}

// ---------------------------------------------------------- initialization

void InitMlp(const MlpShape& shape, std::span<double> params, Rng& rng) {
  shape.Validate();
  std::size_t offset = 0;
  for (std::size_t l = 0; l < shape.layer_count(); ++l) {
    InitDense(params, offset, shape.widths[l], shape.widths[l + 1], rng, false);
    offset += shape.widths[l] * shape.widths[l + 1] + shape.widths[l + 1];
  }
}

void InitResNet(const ResNetShape& shape, std::span<double> params, Rng& rng,
                bool zero_output) {
  shape.Validate();
  const std::size_t h = shape.hidden;
  std::size_t offset = 0;
  InitDense(params, offset, shape.input, h, rng, false);
  offset += shape.input * h + h;
  for (std::size_t j = 0; j < 2 * shape.blocks; ++j) {
    InitDense(params, offset, h, h, rng, false);
    offset += h * h + h;
  }
  InitDense(params, offset, h, shape.output, rng, zero_output);
}

MlpParams MakeMlp(const MlpShape& shape, Rng& rng) {
  MlpParams p{shape, std::vector<double>(shape.ParamCount())};
  InitMlp(shape, p.values, rng);
  return p;
}

ResNetParams MakeResNet(const ResNetShape& shape, Rng& rng, bool zero_output) {
  ResNetParams p{shape, std::vector<double>(shape.ParamCount())};
  InitResNet(shape, p.values, rng, zero_output);
  return p;
}

// ------------------------------------------------------------------ kernels

void MlpForward(const MlpShape& shape, std::span<const double> params,
                std::span<const double> x, std::span<double> y) {
  CheckSizes(shape.ParamCount(), params.size(), shape.input(), x.size(), "mlp");
  if (y.size() != shape.output()) {
    throw DimensionError("mlp: layer " + std::to_string(shape.layer_count() - 1) +
                         " output width " + Dims(y.size(), shape.output()));
  }
  std::size_t max_width = 0;
  for (std::size_t w : shape.widths) max_width = std::max(max_width, w);
  std::span<double> buf = Scratch(2 * max_width);
  double* cur = buf.data();
  double* next = buf.data() + max_width;
  std::copy(x.begin(), x.end(), cur);
  const double* p = params.data();
  const std::size_t layers = shape.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = shape.widths[l], out = shape.widths[l + 1];
    double* dst = (l + 1 == layers) ? y.data() : next;
    DenseForward(p, p + in * out, in, out, cur, dst);
    p += in * out + out;
    if (l + 1 < layers) {
      Activate(shape.activations[l], dst, out);
      std::swap(cur, next);
    }
  }
}

void MlpVjp(const MlpShape& shape, std::span<const double> params,
            std::span<const double> x, std::span<const double> cotangent,
            std::span<double> grad_params, std::span<double> grad_x) {
  CheckSizes(shape.ParamCount(), params.size(), shape.input(), x.size(), "mlp");
  if (cotangent.size() != shape.output())
    throw DimensionError("mlp: cotangent length " +
                         Dims(cotangent.size(), shape.output()));
  if (!grad_params.empty() && grad_params.size() != params.size())
    throw DimensionError("mlp: grad_params length mismatch");
  if (!grad_x.empty() && grad_x.size() != x.size())
    throw DimensionError("mlp: grad_x length mismatch");

  const std::size_t layers = shape.layer_count();
  // Activations a_0 = x, a_l = act(W_l a_{l-1} + b_l) for hidden layers.
  std::size_t act_total = 0, max_width = 0;
  std::vector<std::size_t> act_offset(layers, 0);
  for (std::size_t l = 0; l < layers; ++l) {
    act_offset[l] = act_total;
    act_total += shape.widths[l];
    max_width = std::max(max_width, shape.widths[l + 1]);
    max_width = std::max(max_width, shape.widths[l]);
  }
  std::span<double> buf = Scratch(act_total + 2 * max_width);
  double* acts = buf.data();
  double* g = acts + act_total;
  double* g_prev = g + max_width;
  std::copy(x.begin(), x.end(), acts);
  std::vector<std::size_t> param_offset(layers, 0);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      param_offset[l] = off;
      const std::size_t in = shape.widths[l], out = shape.widths[l + 1];
      if (l + 1 < layers) {
        const double* w = params.data() + off;
        double* dst = acts + act_offset[l + 1];
        DenseForward(w, w + in * out, in, out, acts + act_offset[l], dst);
        Activate(shape.activations[l], dst, out);
      }
      off += in * out + out;
    }
  }
  std::copy(cotangent.begin(), cotangent.end(), g);
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = shape.widths[l], out = shape.widths[l + 1];
    const double* w = params.data() + param_offset[l];
    double* gw = grad_params.empty() ? nullptr : grad_params.data() + param_offset[l];
    double* gb = gw == nullptr ? nullptr : gw + in * out;
    const double* a_in = acts + act_offset[l];
    if (l == 0) {
      DenseVjp(w, in, out, a_in, g, gw, gb,
               grad_x.empty() ? nullptr : grad_x.data());
    } else {
      std::fill(g_prev, g_prev + in, 0.0);
      DenseVjp(w, in, out, a_in, g, gw, gb, g_prev);
      ActivationBackward(shape.activations[l - 1], a_in, g_prev, in);
      std::swap(g, g_prev);
    }
  }
}

void ResNetForward(const ResNetShape& shape, std::span<const double> params,
                   std::span<const double> x, std::span<double> y) {
  CheckSizes(shape.ParamCount(), params.size(), shape.input, x.size(),
             "resnet");
  if (y.size() != shape.output)
    throw DimensionError("resnet: output layer width " +
                         Dims(y.size(), shape.output));
  const std::size_t h = shape.hidden;
  std::span<double> buf = Scratch(2 * h);
  double* state = buf.data();
  double* tmp = buf.data() + h;
  const double* p = params.data();
  DenseForward(p, p + shape.input * h, shape.input, h, x.data(), state);
  Activate(shape.activation, state, h);
  p += shape.input * h + h;
  for (std::size_t j = 0; j < shape.blocks; ++j) {
    DenseForward(p, p + h * h, h, h, state, tmp);
    Activate(shape.activation, tmp, h);
    p += h * h + h;
    // state += W2 tmp + b2
    for (std::size_t o = 0; o < h; ++o) {
      const double* wr = p + o * h;
      double acc = 0.0;
      for (std::size_t i = 0; i < h; ++i) acc += wr[i] * tmp[i];
      state[o] += acc + p[h * h + o];
    }
    p += h * h + h;
  }
  DenseForward(p, p + h * shape.output, h, shape.output, state, y.data());
}

void ResNetVjp(const ResNetShape& shape, std::span<const double> params,
               std::span<const double> x, std::span<const double> cotangent,
               std::span<double> grad_params, std::span<double> grad_x) {
  CheckSizes(shape.ParamCount(), params.size(), shape.input, x.size(),
             "resnet");
  if (cotangent.size() != shape.output)
    throw DimensionError("resnet: cotangent length " +
                         Dims(cotangent.size(), shape.output));
  if (!grad_params.empty() && grad_params.size() != params.size())
    throw DimensionError("resnet: grad_params length mismatch");
  if (!grad_x.empty() && grad_x.size() != x.size())
    throw DimensionError("resnet: grad_x length mismatch");

  const std::size_t h = shape.hidden, nb = shape.blocks;
  // Layout: hs[0..nb] residual stream, rs[0..nb) block activations, then two
  // gradient vectors.
  std::span<double> buf = Scratch((2 * nb + 1) * h + 2 * h);
  double* hs = buf.data();
  double* rs = hs + (nb + 1) * h;
  double* hbar = rs + nb * h;
  double* rbar = hbar + h;

  const double* p0 = params.data();
  const std::size_t in_size = shape.input * h + h;
  const std::size_t dense_hh = h * h + h;
  DenseForward(p0, p0 + shape.input * h, shape.input, h, x.data(), hs);
  Activate(shape.activation, hs, h);
  for (std::size_t j = 0; j < nb; ++j) {
    const double* w1 = p0 + in_size + 2 * j * dense_hh;
    const double* w2 = w1 + dense_hh;
    double* r = rs + j * h;
    const double* hin = hs + j * h;
    double* hout = hs + (j + 1) * h;
    DenseForward(w1, w1 + h * h, h, h, hin, r);
    Activate(shape.activation, r, h);
    DenseForward(w2, w2 + h * h, h, h, r, hout);
    for (std::size_t o = 0; o < h; ++o) hout[o] += hin[o];
  }

  double* gp = grad_params.empty() ? nullptr : grad_params.data();
  const std::size_t out_off = in_size + 2 * nb * dense_hh;
  std::fill(hbar, hbar + h, 0.0);
  DenseVjp(p0 + out_off, h, shape.output, hs + nb * h, cotangent.data(),
           gp ? gp + out_off : nullptr, gp ? gp + out_off + h * shape.output : nullptr,
           hbar);
  for (std::size_t j = nb; j-- > 0;) {
    const std::size_t off1 = in_size + 2 * j * dense_hh;
    const std::size_t off2 = off1 + dense_hh;
    const double* r = rs + j * h;
    const double* hin = hs + j * h;
    std::fill(rbar, rbar + h, 0.0);
    DenseVjp(p0 + off2, h, h, r, hbar, gp ? gp + off2 : nullptr,
             gp ? gp + off2 + h * h : nullptr, rbar);
    ActivationBackward(shape.activation, r, rbar, h);
    // hbar already carries the identity path; add the block path.
    DenseVjp(p0 + off1, h, h, hin, rbar, gp ? gp + off1 : nullptr,
             gp ? gp + off1 + h * h : nullptr, hbar);
  }
  ActivationBackward(shape.activation, hs, hbar, h);
  DenseVjp(p0, shape.input, h, x.data(), hbar, gp, gp ? gp + shape.input * h : nullptr,
           grad_x.empty() ? nullptr : grad_x.data());
}

// ------------------------------------------------------- checked wrappers

std::vector<double> Forward(const MlpParams& net, std::span<const double> x) {
  std::vector<double> y(net.shape.output());
  MlpForward(net.shape, net.values, x, y);
  return y;
}

std::vector<double> Forward(const ResNetParams& net,
                            std::span<const double> x) {
  std::vector<double> y(net.shape.output);
  ResNetForward(net.shape, net.values, x, y);
  return y;
}

NetVjp Vjp(const MlpParams& net, std::span<const double> x,
           std::span<const double> cotangent) {
  NetVjp r{std::vector<double>(net.values.size(), 0.0),
           std::vector<double>(x.size(), 0.0)};
  MlpVjp(net.shape, net.values, x, cotangent, r.grad_params, r.grad_x);
  return r;
}

NetVjp Vjp(const ResNetParams& net, std::span<const double> x,
           std::span<const double> cotangent) {
  NetVjp r{std::vector<double>(net.values.size(), 0.0),
           std::vector<double>(x.size(), 0.0)};
  ResNetVjp(net.shape, net.values, x, cotangent, r.grad_params, r.grad_x);
  return r;
}

}  // namespace dynsim
