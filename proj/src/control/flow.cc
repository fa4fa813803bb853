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

#include "dynsim/control/flow.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dynsim/common.h"
#include "dynsim/nn/checkpoint.h"

namespace dynsim {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

std::size_t NetOffset(const FlowParams& f, std::size_t k, bool shift) {
  return 2 * f.dim + (2 * k + (shift ? 1 : 0)) * f.net.ParamCount();
}

void CheckFinite(std::span<const double> v, const char* where) {
  if (!AllFinite(v)) throw DensityFault(std::string("non-finite ") + where);
}

std::vector<double> Masked(std::span<const double> x,
                           const std::vector<std::uint8_t>& m) {
  std::vector<double> xm(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xm[i] = m[i] ? x[i] : 0.0;
  return xm;
}

// Normalizing pass that keeps the input of every coupling layer.
struct Trace {
  std::vector<double> x0;                  // after the elementwise affine
  std::vector<std::vector<double>> input;  // per coupling layer
  std::vector<std::vector<double>> raw_scale, shift;
  std::vector<double> z;
  double log_det = 0.0;
};

Trace Normalize(const FlowParams& f, std::span<const double> s) {
  const std::size_t d = f.dim;
  if (s.size() != d) throw DimensionError("flow input width");
  CheckFinite(s, "flow input");
  Trace tr;
  auto a = f.affine_log_scale();
  auto b = f.affine_shift();
  std::vector<double> x(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double u = (s[i] - f.mean[i]) / f.std[i];
    x[i] = (u - b[i]) * std::exp(-a[i]);
    tr.log_det -= std::log(f.std[i]) + a[i];
  }
  tr.x0 = x;
  std::vector<double> sr(d), t(d);
  for (std::size_t k = 0; k < f.layer_count(); ++k) {
    const auto& m = f.masks[k];
    const std::vector<double> xm = Masked(x, m);
    MlpForward(f.net, f.scale_net(k), xm, sr);
    MlpForward(f.net, f.shift_net(k), xm, t);
    tr.input.push_back(x);
    for (std::size_t i = 0; i < d; ++i) {
      if (m[i]) continue;
      const double sc = f.scale_bound * std::tanh(sr[i]);
      x[i] = (x[i] - t[i]) * std::exp(-sc);
      tr.log_det -= sc;
    }
    tr.raw_scale.push_back(sr);
    tr.shift.push_back(t);
    CheckFinite(x, "coupling output");
  }
  tr.z = std::move(x);
  if (!std::isfinite(tr.log_det)) throw DensityFault("non-finite log-det");
  return tr;
}

double BaseLogDensity(std::span<const double> z) {
  double q = 0.0;
  for (double v : z) q += v * v;
  return -0.5 * q - 0.5 * static_cast<double>(z.size()) * kLog2Pi;
}

}  // namespace

void FlowConfig::Validate() const {
  if (layers < 1) throw ConfigError("flow needs at least one coupling layer");
  if (hidden < 1) throw ConfigError("flow hidden width must be >= 1");
  if (!(scale_bound > 0)) throw ConfigError("flow scale_bound must be > 0");
  if (batch_size < 1) throw ConfigError("flow batch_size must be >= 1");
  if (!(adam.lr > 0)) throw ConfigError("flow learning rate must be > 0");
}

std::span<double> FlowParams::affine_log_scale() {
  return std::span<double>(values).subspan(0, dim);
}
std::span<double> FlowParams::affine_shift() {
  return std::span<double>(values).subspan(dim, dim);
}
std::span<double> FlowParams::scale_net(std::size_t k) {
  return std::span<double>(values).subspan(NetOffset(*this, k, false),
                                           net.ParamCount());
}
std::span<double> FlowParams::shift_net(std::size_t k) {
  return std::span<double>(values).subspan(NetOffset(*this, k, true),
                                           net.ParamCount());
}
std::span<const double> FlowParams::affine_log_scale() const {
  return std::span<const double>(values).subspan(0, dim);
}
std::span<const double> FlowParams::affine_shift() const {
  return std::span<const double>(values).subspan(dim, dim);
}
std::span<const double> FlowParams::scale_net(std::size_t k) const {
  return std::span<const double>(values).subspan(NetOffset(*this, k, false),
                                                 net.ParamCount());
}
std::span<const double> FlowParams::shift_net(std::size_t k) const {
  return std::span<const double>(values).subspan(NetOffset(*this, k, true),
                                                 net.ParamCount());
}

FlowParams MakeFlow(std::size_t dim, std::size_t layers, std::size_t hidden,
                    double scale_bound, Rng& rng) {
  if (dim < 1) throw DimensionError("flow dimension must be >= 1");
  FlowParams f;
  f.dim = dim;
  f.scale_bound = scale_bound;
  f.mean.assign(dim, 0.0);
  f.std.assign(dim, 1.0);
  f.net = MlpShape::Uniform(dim, hidden, dim, 1, Activation::kTanh);
  for (std::size_t k = 0; k < layers; ++k) {
    std::vector<std::uint8_t> m(dim);
    for (std::size_t i = 0; i < dim; ++i) m[i] = (i + k) % 2 == 0;
    f.masks.push_back(std::move(m));
  }
  f.values.assign(2 * dim + 2 * layers * f.net.ParamCount(), 0.0);
  const std::size_t last = f.net.layer_count() - 1;
  std::size_t tail = 0;  // parameters of the output layer
  for (const TensorSpec& t : f.net.Tensors())
    if (t.name.rfind("layer" + std::to_string(last) + ".", 0) == 0)
      tail += t.size();
  for (std::size_t k = 0; k < layers; ++k) {
    for (bool shift : {false, true}) {
      auto p = shift ? f.shift_net(k) : f.scale_net(k);
      InitMlp(f.net, p, rng);
      std::fill(p.end() - static_cast<std::ptrdiff_t>(tail), p.end(), 0.0);
    }
  }
  return f;
}

std::vector<double> FlowToBase(const FlowParams& f, std::span<const double> s,
                               double* log_det) {
  Trace tr = Normalize(f, s);
  if (log_det) *log_det = tr.log_det;
  return std::move(tr.z);
}

std::vector<double> FlowFromBase(const FlowParams& f, std::span<const double> z,
                                 double* log_det) {
  const std::size_t d = f.dim;
  if (z.size() != d) throw DimensionError("flow input width");
  std::vector<double> x(z.begin(), z.end()), sr(d), t(d);
  double ld = 0.0;
  for (std::size_t k = f.layer_count(); k-- > 0;) {
    const auto& m = f.masks[k];
    const std::vector<double> xm = Masked(x, m);
    MlpForward(f.net, f.scale_net(k), xm, sr);
    MlpForward(f.net, f.shift_net(k), xm, t);
    for (std::size_t i = 0; i < d; ++i) {
      if (m[i]) continue;
      const double sc = f.scale_bound * std::tanh(sr[i]);
      x[i] = x[i] * std::exp(sc) + t[i];
      ld += sc;
    }
  }
  auto a = f.affine_log_scale();
  auto b = f.affine_shift();
  for (std::size_t i = 0; i < d; ++i) {
    x[i] = f.mean[i] + f.std[i] * (x[i] * std::exp(a[i]) + b[i]);
    ld += a[i] + std::log(f.std[i]);
  }
  CheckFinite(x, "flow output");
  if (log_det) *log_det = ld;
  return x;
}

double FlowLogDensity(const FlowParams& f, std::span<const double> s) {
  const Trace tr = Normalize(f, s);
  return BaseLogDensity(tr.z) + tr.log_det;
}

double FlowLogDensityGrad(const FlowParams& f, std::span<const double> s,
                          std::span<double> grad) {
  if (grad.size() != f.values.size()) throw DimensionError("flow gradient size");
  const Trace tr = Normalize(f, s);
  const std::size_t d = f.dim, np = f.net.ParamCount();
  std::vector<double> gy(d), gs(d), gt(d), gxm(d), y(d);
  for (std::size_t i = 0; i < d; ++i) gy[i] = -tr.z[i];
  for (std::size_t k = f.layer_count(); k-- > 0;) {
    const auto& m = f.masks[k];
    const auto& x = tr.input[k];
    // Output of this layer: the next layer's input, or z.
    const auto& out = k + 1 < f.layer_count() ? tr.input[k + 1] : tr.z;
    for (std::size_t i = 0; i < d; ++i) {
      gs[i] = gt[i] = 0.0;
      y[i] = out[i];
      if (m[i]) continue;
      const double th = std::tanh(tr.raw_scale[k][i]);
      const double e = std::exp(-f.scale_bound * th);
      gt[i] = -gy[i] * e;
      gs[i] = (-gy[i] * y[i] - 1.0) * f.scale_bound * (1.0 - th * th);
      gy[i] *= e;
    }
    const std::vector<double> xm = Masked(x, m);
    std::fill(gxm.begin(), gxm.end(), 0.0);
    MlpVjp(f.net, f.scale_net(k), xm, gs,
           grad.subspan(NetOffset(f, k, false), np), gxm);
    MlpVjp(f.net, f.shift_net(k), xm, gt,
           grad.subspan(NetOffset(f, k, true), np), gxm);
    for (std::size_t i = 0; i < d; ++i)
      if (m[i]) gy[i] += gxm[i];
  }
  auto a = f.affine_log_scale();
  for (std::size_t i = 0; i < d; ++i) {
    grad[i] += -gy[i] * tr.x0[i] - 1.0;        // d/da
    grad[d + i] += -gy[i] * std::exp(-a[i]);  // d/db
  }
  return BaseLogDensity(tr.z) + tr.log_det;
}

FlowParams FitFlow(std::span<const double> states, std::size_t dim,
                   const FlowConfig& cfg) {
  cfg.Validate();
  if (dim == 0 || states.size() % dim != 0)
    throw DimensionError("flow data width");
  const std::size_t n = states.size() / dim;
  if (n < 1000) throw ConfigError("flow fit needs at least 1000 states");
  Rng rng(cfg.seed);
  FlowParams f = MakeFlow(dim, cfg.layers, cfg.hidden, cfg.scale_bound, rng);
  for (std::size_t j = 0; j < dim; ++j) {
    double m = 0.0, v = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += states[r * dim + j];
    m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const double e = states[r * dim + j] - m;
      v += e * e;
    }
    const double sd = std::sqrt(v / static_cast<double>(n));
    f.mean[j] = m;
    f.std[j] = sd > 0 ? sd : 1.0;
  }

  AdamState adam(f.values.size(), cfg.adam);
  const std::size_t chunks = std::min<std::size_t>(cfg.batch_size, 16);
  std::vector<std::vector<double>> grads(chunks);
  std::vector<double> chunk_ll(chunks), grad(f.values.size());
  std::vector<std::size_t> idx(cfg.batch_size);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (auto& i : idx) i = pick(rng);
    ForEachIndex(cfg.exec, chunks, [&](std::size_t c) {
      grads[c].assign(f.values.size(), 0.0);
      chunk_ll[c] = 0.0;
      for (std::size_t b = c; b < idx.size(); b += chunks) {
        chunk_ll[c] +=
            FlowLogDensityGrad(f, states.subspan(idx[b] * dim, dim), grads[c]);
      }
    });
    double ll = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t c = 0; c < chunks; ++c) {
      ll += chunk_ll[c];
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += grads[c][j];
    }
    const double inv = 1.0 / static_cast<double>(idx.size());
    for (double& g : grad) g *= -inv;  // minimize the negative log-likelihood
    if (!std::isfinite(ll) || !AllFinite(grad)) {
      throw TrainingFault("flow fit diverged at step " + std::to_string(step));
    }
    AdamStep(adam, f.values, grad);
  }
  return f;
}

void SaveFlow(const std::string& path, const FlowParams& f,
              std::uint64_t config_hash) {
  std::vector<NamedTensor> t;
  auto u32 = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
  t.push_back({"flow.meta", {4},
               {static_cast<double>(f.dim), static_cast<double>(f.layer_count()),
                static_cast<double>(f.net.widths[1]), f.scale_bound}});
  t.push_back({"flow.mean", {u32(f.dim)}, f.mean});
  t.push_back({"flow.std", {u32(f.dim)}, f.std});
  t.push_back({"flow.values", {u32(f.values.size())}, f.values});
  t.push_back({"meta.config_hash", {2},
               {static_cast<double>(config_hash & 0xFFFFFFFFULL),
                static_cast<double>(config_hash >> 32)}});
  WriteCheckpoint(path, t);
}

FlowParams LoadFlow(const std::string& path) {
  const auto t = ReadCheckpoint(path);
  const auto& meta = GetTensor(t, "flow.meta").values;
  if (meta.size() != 4) throw FormatError("malformed flow.meta", 0);
  Rng rng(0);
  FlowParams f = MakeFlow(static_cast<std::size_t>(meta[0]),
                          static_cast<std::size_t>(meta[1]),
                          static_cast<std::size_t>(meta[2]), meta[3], rng);
  const auto& mean = GetTensor(t, "flow.mean").values;
  const auto& sd = GetTensor(t, "flow.std").values;
  const auto& v = GetTensor(t, "flow.values").values;
  if (mean.size() != f.dim || sd.size() != f.dim || v.size() != f.values.size())
    throw FormatError("flow tensors do not match flow.meta", 0);
  f.mean = mean;
  f.std = sd;
  f.values = v;
  return f;
}

}  // namespace dynsim
