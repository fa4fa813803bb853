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

#include "dynsim/dynamics/model.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dynsim {
namespace {

struct Workspace {
  std::vector<double> sn, an, xin, l, b, tau, w, v, acc, corr, vbar, lbar,
      wbar, g_sn, g_an, g_xin, g_q, uv, plain_out;
};

Workspace& Scratch() {
  thread_local Workspace ws;
  return ws;
}

void Fit(std::vector<double>& v, std::size_t n) {
  if (v.size() != n) v.assign(n, 0.0);
}

void CheckShapes(const DynamicsParams& p, std::span<const double> s,
                 std::span<const double> a) {
  const StateDims& d = p.arch.dims;
  if (s.size() != d.state()) {
    throw DimensionError("state length " + std::to_string(s.size()) +
                         " != dq + dv = " + std::to_string(d.state()));
  }
  if (a.size() != d.da) {
    throw DimensionError("action length " + std::to_string(a.size()) +
                         " != da = " + std::to_string(d.da));
  }
}

// State features (standardized values, or (sin, cos) for periodic angles;
// position features first), the standardized action and their
// concatenation.
void Normalize(const DynamicsParams& p, std::span<const double> s,
               std::span<const double> a, Workspace& ws) {
  const Normalization& n = p.norm;
  const ModelArchitecture& arch = p.arch;
  const std::size_t ds = s.size(), da = a.size(), dq = arch.dims.dq;
  const std::size_t nf = arch.state_features();
  Fit(ws.sn, nf);
  Fit(ws.an, da);
  Fit(ws.xin, nf + da);
  std::size_t f = 0;
  for (std::size_t i = 0; i < ds; ++i) {
    if (i < dq && i < arch.periodic.size() && arch.periodic[i]) {
      ws.sn[f++] = std::sin(s[i]);
      ws.sn[f++] = std::cos(s[i]);
    } else {
      ws.sn[f++] = (s[i] - n.state_mean[i]) / n.state_scale[i];
    }
  }
  for (std::size_t i = 0; i < da; ++i)
    ws.an[i] = (a[i] - n.action_mean[i]) / n.action_scale[i];
  std::copy(ws.sn.begin(), ws.sn.end(), ws.xin.begin());
  std::copy(ws.an.begin(), ws.an.end(), ws.xin.begin() + nf);
}

// Pulls feature gradients back onto the raw state.
void FeatureVjp(const DynamicsParams& p, std::span<const double> s,
                std::span<const double> g_feat, std::span<double> grad_s) {
  const ModelArchitecture& arch = p.arch;
  const std::size_t dq = arch.dims.dq;
  std::size_t f = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i < dq && i < arch.periodic.size() && arch.periodic[i]) {
      grad_s[i] += std::cos(s[i]) * g_feat[f] - std::sin(s[i]) * g_feat[f + 1];
      f += 2;
    } else {
      grad_s[i] += g_feat[f++] / p.norm.state_scale[i];
    }
  }
}

std::span<const double> Slice(const DynamicsParams& p, const ParamGroup& g) {
  return std::span<const double>(p.values).subspan(g.offset, g.size);
}

std::span<double> GradSlice(std::span<double> grad, const ParamGroup& g,
                            bool enabled) {
  if (grad.empty() || !enabled) return {};
  return grad.subspan(g.offset, g.size);
}

// acc = L (L^T w) with L packed row-major lower-triangular.
void MassInverseTimes(std::span<const double> l, std::span<const double> w,
                      std::span<double> v, std::span<double> acc) {
  const std::size_t n = w.size();
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = j; i < n; ++i) sum += l[i * (i + 1) / 2 + j] * w[i];
    v[j] = sum;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    const double* row = l.data() + i * (i + 1) / 2;
    for (std::size_t j = 0; j <= i; ++j) sum += row[j] * v[j];
    acc[i] = sum;
  }
}

// Unscaled predictor acceleration M (b + tau) into ws.acc.
void PredictorAcceleration(const DynamicsParams& p, Workspace& ws) {
  const ModelArchitecture& arch = p.arch;
  const std::size_t dv = arch.dims.dv;
  const auto& groups = p.groups();
  Fit(ws.l, TriangularSize(dv));
  Fit(ws.b, dv);
  Fit(ws.tau, dv);
  Fit(ws.w, dv);
  Fit(ws.v, dv);
  Fit(ws.acc, dv);
  ResNetForward(arch.position_encoder, Slice(p, groups[0]),
                std::span<const double>(ws.sn).first(arch.position_features()),
                ws.l);
  ResNetForward(arch.state_encoder, Slice(p, groups[1]), ws.sn, ws.b);
  MlpForward(arch.action_encoder, Slice(p, groups[2]), ws.an, ws.tau);
  for (std::size_t i = 0; i < dv; ++i) ws.w[i] = ws.b[i] + ws.tau[i];
  MassInverseTimes(ws.l, ws.w, ws.v, ws.acc);
}

void Derivative(const DynamicsParams& p, std::span<const double> s,
                std::span<const double> a, std::span<double> ds,
                std::size_t n_correctors) {
  CheckShapes(p, s, a);
  if (ds.size() != s.size()) throw DimensionError("derivative output length");
  Workspace& ws = Scratch();
  Normalize(p, s, a, ws);
  const std::size_t dq = p.arch.dims.dq, dv = p.arch.dims.dv;
  if (p.arch.kind == ModelKind::kPlainResNet) {
    ResNetForward(p.arch.plain, Slice(p, p.groups()[0]), ws.xin, ds);
    for (std::size_t i = 0; i < ds.size(); ++i) ds[i] *= p.norm.derivative_scale[i];
    return;
  }
  PredictorAcceleration(p, ws);
  Fit(ws.corr, dv);
  for (std::size_t k = 0; k < n_correctors; ++k) {
    ResNetForward(p.arch.correctors[k], Slice(p, p.groups()[3 + k]), ws.xin,
                  ws.corr);
    for (std::size_t i = 0; i < dv; ++i) ws.acc[i] += ws.corr[i];
  }
  for (std::size_t i = 0; i < dq; ++i) ds[i] = s[dq + i];
  const double c = p.norm.acceleration_scale;
  for (std::size_t i = 0; i < dv; ++i) ds[dq + i] = c * ws.acc[i];
}

std::size_t InferBlocks(const std::vector<NamedTensor>& t,
                        const std::string& prefix) {
  std::size_t n = 0;
  while (FindTensor(t, prefix + ".block" + std::to_string(n) + ".fc1.weight"))
    ++n;
  return n;
}

ResNetShape InferResNet(const std::vector<NamedTensor>& t,
                        const std::string& prefix, Activation act) {
  const NamedTensor& in = GetTensor(t, prefix + ".input.weight");
  const NamedTensor& out = GetTensor(t, prefix + ".output.weight");
  if (in.dims.size() != 2 || out.dims.size() != 2)
    throw FormatError("tensor '" + prefix + "' weights must be rank 2", 0);
  ResNetShape s;
  s.hidden = in.dims[0];
  s.input = in.dims[1];
  s.output = out.dims[0];
  s.blocks = InferBlocks(t, prefix);
  s.activation = act;
  return s;
}

MlpShape InferMlp(const std::vector<NamedTensor>& t, const std::string& prefix,
                  Activation act) {
  MlpShape s;
  std::size_t l = 0;
  while (const NamedTensor* w =
             FindTensor(t, prefix + ".layer" + std::to_string(l) + ".weight")) {
    if (w->dims.size() != 2)
      throw FormatError("tensor '" + prefix + "' weights must be rank 2", 0);
    if (l == 0) s.widths.push_back(w->dims[1]);
    s.widths.push_back(w->dims[0]);
    ++l;
  }
  if (l == 0) throw FormatError("checkpoint lacks '" + prefix + "' layers", 0);
  s.activations.assign(l - 1, act);
  return s;
}

std::vector<double> AsVector(const NamedTensor& t) { return t.values; }

}  // namespace

// ---------------------------------------------------------------- sizes

ModelSize ModelSize::Small() {
  ModelSize s;
  s.position_blocks = 3, s.position_hidden = 64;
  s.state_blocks = 3, s.state_hidden = 64;
  s.action_blocks = 1, s.action_hidden = 32;
  s.correctors = 1, s.corrector_blocks = 5, s.corrector_hidden = 64;
  return s;
}

ModelSize ModelSize::Medium() {
  ModelSize s = Small();
  s.action_blocks = 3;
  s.corrector_hidden = 128;
  return s;
}

ModelSize ModelSize::Large() {
  ModelSize s;
  s.position_blocks = 3, s.position_hidden = 128;
  s.state_blocks = 3, s.state_hidden = 128;
  s.action_blocks = 3, s.action_hidden = 128;
  s.correctors = 3, s.corrector_blocks = 5, s.corrector_hidden = 128;
  return s;
}

ModelSize ModelSize::Desk() { return ModelSize{}; }

ModelSize ModelSize::ByName(const std::string& name) {
  if (name == "desk") return Desk();
  if (name == "small") return Small();
  if (name == "medium") return Medium();
  if (name == "large") return Large();
  throw ConfigError("unknown model size '" + name + "'");
}

// --------------------------------------------------------- architecture

std::size_t ModelArchitecture::periodic_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : periodic) n += v ? 1 : 0;
  return n;
}

namespace {
void CheckPeriodic(const StateDims& dims,
                   const std::vector<std::uint8_t>& periodic) {
  if (!periodic.empty() && periodic.size() != dims.dq) {
    throw DimensionError("periodic mask length " +
                         std::to_string(periodic.size()) + " != dq");
  }
}
}  // namespace

ModelArchitecture MakeStructuredArchitecture(
    const StateDims& dims, const ModelSize& size,
    const std::vector<std::uint8_t>& periodic) {
  if (dims.dq != dims.dv) {
    throw DimensionError("structured model needs dq == dv (got " +
                         std::to_string(dims.dq) + ", " +
                         std::to_string(dims.dv) + ")");
  }
  if (dims.dv == 0 || dims.da == 0) throw DimensionError("empty state/action");
  CheckPeriodic(dims, periodic);
  ModelArchitecture a;
  a.kind = ModelKind::kStructured;
  a.dims = dims;
  a.periodic = periodic;
  a.position_encoder = {a.position_features(), size.position_hidden,
                        TriangularSize(dims.dv), size.position_blocks,
                        Activation::kTanh};
  a.state_encoder = {a.state_features(), size.state_hidden, dims.dv,
                     size.state_blocks, Activation::kTanh};
  a.action_encoder = MlpShape::Uniform(dims.da, size.action_hidden, dims.dv,
                                       size.action_blocks, Activation::kTanh);
  for (std::size_t i = 0; i < size.correctors; ++i) {
    a.correctors.push_back({a.state_features() + dims.da,
                            size.corrector_hidden, dims.dv,
                            size.corrector_blocks, size.corrector_activation});
  }
  a.position_encoder.Validate();
  a.state_encoder.Validate();
  a.action_encoder.Validate();
  return a;
}

ModelArchitecture MakePlainArchitecture(
    const StateDims& dims, std::size_t blocks, std::size_t target_params,
    const std::vector<std::uint8_t>& periodic) {
  CheckPeriodic(dims, periodic);
  ModelArchitecture a;
  a.kind = ModelKind::kPlainResNet;
  a.dims = dims;
  a.periodic = periodic;
  ResNetShape best{a.state_features() + dims.da, 1, dims.state(), blocks,
                   Activation::kTanh};
  for (std::size_t h = 1; h <= 4096; ++h) {
    ResNetShape s = best;
    s.hidden = h;
    if (s.ParamCount() > target_params) break;
    best = s;
  }
  a.plain = best;
  return a;
}

std::vector<ParamGroup> ParamGroups(const ModelArchitecture& arch) {
  std::vector<ParamGroup> g;
  std::size_t off = 0;
  auto add = [&](const std::string& name, std::size_t n) {
    g.push_back({name, off, n});
    off += n;
  };
  if (arch.kind == ModelKind::kPlainResNet) {
    add("plain", arch.plain.ParamCount());
    return g;
  }
  add("pos_enc", arch.position_encoder.ParamCount());
  add("state_enc", arch.state_encoder.ParamCount());
  add("act_enc", arch.action_encoder.ParamCount());
  for (std::size_t i = 0; i < arch.correctors.size(); ++i)
    add("corr" + std::to_string(i), arch.correctors[i].ParamCount());
  return g;
}

Normalization Normalization::Identity(const StateDims& dims) {
  Normalization n;
  n.state_mean.assign(dims.state(), 0.0);
  n.state_scale.assign(dims.state(), 1.0);
  n.action_mean.assign(dims.da, 0.0);
  n.action_scale.assign(dims.da, 1.0);
  n.acceleration_scale = 1.0;
  n.derivative_scale.assign(dims.state(), 1.0);
  return n;
}

// ----------------------------------------------------------- parameters

void DynamicsParams::RebuildGroups() {
  groups_ = ParamGroups(arch);
  std::size_t total = 0;
  for (const ParamGroup& g : groups_) total += g.size;
  if (values.size() != total) {
    throw DimensionError("parameter vector length " +
                         std::to_string(values.size()) + " != architecture " +
                         std::to_string(total));
  }
  if (active_correctors > arch.correctors.size()) {
    throw DimensionError("active_correctors exceeds corrector count");
  }
}

const ParamGroup& DynamicsParams::Group(const std::string& name) const {
  for (const ParamGroup& g : groups_)
    if (g.name == name) return g;
  throw ConfigError("no parameter group '" + name + "'");
}

std::span<double> DynamicsParams::GroupValues(const std::string& name) {
  const ParamGroup& g = Group(name);
  return std::span<double>(values).subspan(g.offset, g.size);
}

std::span<const double> DynamicsParams::GroupValues(
    const std::string& name) const {
  const ParamGroup& g = Group(name);
  return std::span<const double>(values).subspan(g.offset, g.size);
}

DynamicsParams InitDynamicsParams(const ModelArchitecture& arch, Rng& rng) {
  DynamicsParams p;
  p.arch = arch;
  p.norm = Normalization::Identity(arch.dims);
  std::size_t total = 0;
  for (const ParamGroup& g : ParamGroups(arch)) total += g.size;
  p.values.assign(total, 0.0);
  p.RebuildGroups();
  if (arch.kind == ModelKind::kPlainResNet) {
    InitResNet(arch.plain, p.GroupValues("plain"), rng);
    return p;
  }
  InitResNet(arch.position_encoder, p.GroupValues("pos_enc"), rng);
  InitResNet(arch.state_encoder, p.GroupValues("state_enc"), rng);
  InitMlp(arch.action_encoder, p.GroupValues("act_enc"), rng);
  for (std::size_t i = 0; i < arch.correctors.size(); ++i) {
    InitResNet(arch.correctors[i], p.GroupValues("corr" + std::to_string(i)),
               rng, /*zero_output=*/true);
  }
  return p;
}

GradMask GradMask::None(std::size_t n_correctors) {
  GradMask m;
  m.position = m.state = m.action = m.plain = false;
  m.correctors.assign(n_correctors, false);
  return m;
}

// ------------------------------------------------------------- forward

Matrix AssembleMassInverse(std::span<const double> l_flat) {
  // Solve n(n+1)/2 = len.
  std::size_t n = 0;
  while (TriangularSize(n) < l_flat.size()) ++n;
  if (TriangularSize(n) != l_flat.size()) {
    throw DimensionError("length " + std::to_string(l_flat.size()) +
                         " is not a triangular number");
  }
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = l_flat.data() + TriangularSize(i);
    for (std::size_t j = 0; j <= i; ++j) {
      const double* lj = l_flat.data() + TriangularSize(j);
      double sum = 0.0;
      for (std::size_t k = 0; k <= j; ++k) sum += li[k] * lj[k];
      m(i, j) = sum;
      m(j, i) = sum;
    }
  }
  return m;
}

void PredictorDerivative(const DynamicsParams& p, std::span<const double> s,
                         std::span<const double> a, std::span<double> ds) {
  if (p.arch.kind != ModelKind::kStructured)
    throw ConfigError("predictor derivative needs a structured model");
  Derivative(p, s, a, ds, 0);
}

void FullDerivative(const DynamicsParams& p, std::span<const double> s,
                    std::span<const double> a, std::span<double> ds) {
  Derivative(p, s, a, ds, p.active_correctors);
}

std::vector<double> FullDerivative(const DynamicsParams& p,
                                   std::span<const double> s,
                                   std::span<const double> a) {
  std::vector<double> ds(s.size());
  FullDerivative(p, s, a, ds);
  return ds;
}

// ------------------------------------------------------------ backward

void DynamicsVjp(const DynamicsParams& p, std::span<const double> s,
                 std::span<const double> a, std::span<const double> cotangent,
                 std::span<double> grad_theta, std::span<double> grad_s,
                 std::span<double> grad_a, const GradMask& mask) {
  CheckShapes(p, s, a);
  if (cotangent.size() != s.size()) throw DimensionError("cotangent length");
  if (!grad_theta.empty() && grad_theta.size() != p.values.size())
    throw DimensionError("grad_theta length");
  if (!grad_s.empty() && grad_s.size() != s.size())
    throw DimensionError("grad_s length");
  if (!grad_a.empty() && grad_a.size() != a.size())
    throw DimensionError("grad_a length");

  Workspace& ws = Scratch();
  Normalize(p, s, a, ws);
  const std::size_t dq = p.arch.dims.dq, dv = p.arch.dims.dv;
  const std::size_t nstate = s.size(), na = a.size();
  const std::size_t nf = p.arch.state_features();
  Fit(ws.g_xin, nf + na);
  std::fill(ws.g_xin.begin(), ws.g_xin.end(), 0.0);
  const auto& groups = p.groups();

  if (p.arch.kind == ModelKind::kPlainResNet) {
    Fit(ws.uv, nstate);
    for (std::size_t i = 0; i < nstate; ++i)
      ws.uv[i] = cotangent[i] * p.norm.derivative_scale[i];
    ResNetVjp(p.arch.plain, Slice(p, groups[0]), ws.xin, ws.uv,
              GradSlice(grad_theta, groups[0], mask.plain), ws.g_xin);
  } else {
    // Scaled cotangent of the acceleration block.
    Fit(ws.uv, dv);
    const double c = p.norm.acceleration_scale;
    for (std::size_t i = 0; i < dv; ++i) ws.uv[i] = c * cotangent[dq + i];

    for (std::size_t k = 0; k < p.active_correctors; ++k) {
      ResNetVjp(p.arch.correctors[k], Slice(p, groups[3 + k]), ws.xin, ws.uv,
                GradSlice(grad_theta, groups[3 + k], mask.corrector(k)),
                ws.g_xin);
    }

    PredictorAcceleration(p, ws);
    const std::size_t nt = TriangularSize(dv);
    Fit(ws.vbar, dv);
    Fit(ws.lbar, nt);
    Fit(ws.wbar, dv);
    std::fill(ws.lbar.begin(), ws.lbar.end(), 0.0);
    // acc = L v:  Lbar_ij += u_i v_j;  vbar = L^T u.
    for (std::size_t j = 0; j < dv; ++j) {
      double sum = 0.0;
      for (std::size_t i = j; i < dv; ++i) sum += ws.l[TriangularSize(i) + j] * ws.uv[i];
      ws.vbar[j] = sum;
    }
    // v = L^T w:  Lbar_ij += w_i vbar_j;  wbar = L vbar.
    for (std::size_t i = 0; i < dv; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j <= i; ++j) {
        const std::size_t idx = TriangularSize(i) + j;
        ws.lbar[idx] += ws.uv[i] * ws.v[j] + ws.w[i] * ws.vbar[j];
        sum += ws.l[idx] * ws.vbar[j];
      }
      ws.wbar[i] = sum;
    }
    const std::size_t nq = p.arch.position_features();
    Fit(ws.g_q, nq);
    std::fill(ws.g_q.begin(), ws.g_q.end(), 0.0);
    ResNetVjp(p.arch.position_encoder, Slice(p, groups[0]),
              std::span<const double>(ws.sn).first(nq), ws.lbar,
              GradSlice(grad_theta, groups[0], mask.position), ws.g_q);
    std::span<double> g_sn = std::span<double>(ws.g_xin).first(nf);
    std::span<double> g_an = std::span<double>(ws.g_xin).subspan(nf, na);
    ResNetVjp(p.arch.state_encoder, Slice(p, groups[1]), ws.sn, ws.wbar,
              GradSlice(grad_theta, groups[1], mask.state), g_sn);
    MlpVjp(p.arch.action_encoder, Slice(p, groups[2]), ws.an, ws.wbar,
           GradSlice(grad_theta, groups[2], mask.action), g_an);
    for (std::size_t i = 0; i < nq; ++i) ws.g_xin[i] += ws.g_q[i];
  }

  if (!grad_s.empty()) {
    FeatureVjp(p, s, std::span<const double>(ws.g_xin).first(nf), grad_s);
    if (p.arch.kind == ModelKind::kStructured) {
      // Position-rate block is qdot itself.
      for (std::size_t i = 0; i < dq; ++i) grad_s[dq + i] += cotangent[i];
    }
  }
  if (!grad_a.empty()) {
    for (std::size_t i = 0; i < na; ++i)
      grad_a[i] += ws.g_xin[nf + i] / p.norm.action_scale[i];
  }
}

DynamicsGradients DynamicsVjp(const DynamicsParams& p,
                              std::span<const double> s,
                              std::span<const double> a,
                              std::span<const double> cotangent) {
  DynamicsGradients g{std::vector<double>(p.values.size(), 0.0),
                      std::vector<double>(s.size(), 0.0),
                      std::vector<double>(a.size(), 0.0)};
  DynamicsVjp(p, s, a, cotangent, g.theta, g.s, g.a);
  return g;
}

// ---------------------------------------------------------- checkpoints

std::vector<NamedTensor> ToTensors(const DynamicsParams& p,
                                   std::uint64_t config_hash) {
  std::vector<NamedTensor> out;
  auto scalar_vec = [](std::vector<double> v) {
    return NamedTensor{"", {static_cast<std::uint32_t>(v.size())}, std::move(v)};
  };
  auto add = [&](const std::string& name, std::vector<double> v) {
    NamedTensor t = scalar_vec(std::move(v));
    t.name = name;
    out.push_back(std::move(t));
  };
  const StateDims& d = p.arch.dims;
  add("meta.kind", {static_cast<double>(p.arch.kind)});
  add("meta.dims", {static_cast<double>(d.dq), static_cast<double>(d.dv),
                    static_cast<double>(d.da)});
  add("meta.active_correctors", {static_cast<double>(p.active_correctors)});
  if (p.arch.periodic_count() > 0) {
    add("meta.periodic",
        std::vector<double>(p.arch.periodic.begin(), p.arch.periodic.end()));
  }
  add("meta.config_hash",
      {static_cast<double>(config_hash & 0xFFFFFFFFULL),
       static_cast<double>(config_hash >> 32)});
  std::vector<double> acts;

  auto add_group = [&](const ParamGroup& g, std::vector<TensorSpec> specs) {
    for (const TensorSpec& s : specs) {
      NamedTensor t;
      t.name = g.name + "." + s.name;
      for (std::size_t dim : s.dims) t.dims.push_back(static_cast<std::uint32_t>(dim));
      t.values.assign(p.values.begin() + g.offset + s.offset,
                      p.values.begin() + g.offset + s.offset + s.size());
      out.push_back(std::move(t));
    }
  };
  if (p.arch.kind == ModelKind::kPlainResNet) {
    acts.push_back(static_cast<double>(p.arch.plain.activation));
    add_group(p.Group("plain"), p.arch.plain.Tensors());
  } else {
    acts.push_back(static_cast<double>(p.arch.position_encoder.activation));
    acts.push_back(static_cast<double>(p.arch.state_encoder.activation));
    acts.push_back(static_cast<double>(p.arch.action_encoder.activations.empty()
                                           ? Activation::kIdentity
                                           : p.arch.action_encoder.activations[0]));
    add_group(p.Group("pos_enc"), p.arch.position_encoder.Tensors());
    add_group(p.Group("state_enc"), p.arch.state_encoder.Tensors());
    add_group(p.Group("act_enc"), p.arch.action_encoder.Tensors());
    for (std::size_t i = 0; i < p.arch.correctors.size(); ++i) {
      acts.push_back(static_cast<double>(p.arch.correctors[i].activation));
      add_group(p.Group("corr" + std::to_string(i)),
                p.arch.correctors[i].Tensors());
    }
  }
  add("meta.activations", acts);
  add("norm.state_mean", p.norm.state_mean);
  add("norm.state_scale", p.norm.state_scale);
  add("norm.action_mean", p.norm.action_mean);
  add("norm.action_scale", p.norm.action_scale);
  add("norm.acceleration_scale", {p.norm.acceleration_scale});
  add("norm.derivative_scale", p.norm.derivative_scale);
  return out;
}

std::uint64_t CheckpointConfigHash(const std::vector<NamedTensor>& tensors) {
  const NamedTensor* t = FindTensor(tensors, "meta.config_hash");
  if (t == nullptr || t->values.size() != 2) return 0;
  return static_cast<std::uint64_t>(t->values[0]) |
         (static_cast<std::uint64_t>(t->values[1]) << 32);
}

DynamicsParams FromTensors(const std::vector<NamedTensor>& tensors) {
  const NamedTensor& kind = GetTensor(tensors, "meta.kind");
  const NamedTensor& dims = GetTensor(tensors, "meta.dims");
  const NamedTensor& acts = GetTensor(tensors, "meta.activations");
  if (kind.values.size() != 1 || dims.values.size() != 3)
    throw FormatError("malformed meta tensors", 0);
  auto act_at = [&](std::size_t i) {
    if (i >= acts.values.size()) throw FormatError("meta.activations too short", 0);
    return static_cast<Activation>(static_cast<int>(acts.values[i]));
  };
  ModelArchitecture arch;
  arch.kind = static_cast<ModelKind>(static_cast<int>(kind.values[0]));
  arch.dims = {static_cast<std::size_t>(dims.values[0]),
               static_cast<std::size_t>(dims.values[1]),
               static_cast<std::size_t>(dims.values[2])};
  if (const NamedTensor* per = FindTensor(tensors, "meta.periodic")) {
    if (per->values.size() != arch.dims.dq)
      throw FormatError("meta.periodic does not match meta.dims", 0);
    for (double v : per->values) arch.periodic.push_back(v != 0.0);
  }
  std::vector<std::pair<std::string, std::vector<TensorSpec>>> layout;
  if (arch.kind == ModelKind::kPlainResNet) {
    arch.plain = InferResNet(tensors, "plain", act_at(0));
    layout.push_back({"plain", arch.plain.Tensors()});
  } else if (arch.kind == ModelKind::kStructured) {
    arch.position_encoder = InferResNet(tensors, "pos_enc", act_at(0));
    arch.state_encoder = InferResNet(tensors, "state_enc", act_at(1));
    arch.action_encoder = InferMlp(tensors, "act_enc", act_at(2));
    layout.push_back({"pos_enc", arch.position_encoder.Tensors()});
    layout.push_back({"state_enc", arch.state_encoder.Tensors()});
    layout.push_back({"act_enc", arch.action_encoder.Tensors()});
    for (std::size_t i = 0;
         FindTensor(tensors, "corr" + std::to_string(i) + ".input.weight"); ++i) {
      const std::string name = "corr" + std::to_string(i);
      arch.correctors.push_back(InferResNet(tensors, name, act_at(3 + i)));
      layout.push_back({name, arch.correctors.back().Tensors()});
    }
  } else {
    throw FormatError("unknown model kind", 0);
  }

  const std::size_t in_width = arch.kind == ModelKind::kPlainResNet
                                   ? arch.plain.input
                                   : arch.state_encoder.input;
  const std::size_t expect = arch.kind == ModelKind::kPlainResNet
                                 ? arch.state_features() + arch.dims.da
                                 : arch.state_features();
  if (in_width != expect)
    throw FormatError("network input width does not match meta tensors", 0);
  DynamicsParams p;
  p.arch = arch;
  for (const auto& [group, specs] : layout) {
    for (const TensorSpec& s : specs) {
      const NamedTensor& t = GetTensor(tensors, group + "." + s.name);
      if (t.values.size() != s.size())
        throw FormatError("tensor '" + t.name + "' has wrong size", 0);
      p.values.insert(p.values.end(), t.values.begin(), t.values.end());
    }
  }
  p.active_correctors = static_cast<std::size_t>(
      GetTensor(tensors, "meta.active_correctors").values.at(0));
  p.norm.state_mean = AsVector(GetTensor(tensors, "norm.state_mean"));
  p.norm.state_scale = AsVector(GetTensor(tensors, "norm.state_scale"));
  p.norm.action_mean = AsVector(GetTensor(tensors, "norm.action_mean"));
  p.norm.action_scale = AsVector(GetTensor(tensors, "norm.action_scale"));
  p.norm.acceleration_scale =
      GetTensor(tensors, "norm.acceleration_scale").values.at(0);
  p.norm.derivative_scale = AsVector(GetTensor(tensors, "norm.derivative_scale"));
  if (p.norm.state_mean.size() != arch.dims.state() ||
      p.norm.state_scale.size() != arch.dims.state() ||
      p.norm.action_mean.size() != arch.dims.da ||
      p.norm.action_scale.size() != arch.dims.da) {
    throw FormatError("normalization tensors do not match meta.dims", 0);
  }
  p.RebuildGroups();
  return p;
}

void SaveDynamics(const std::string& path, const DynamicsParams& p,
                  std::uint64_t config_hash) {
  WriteCheckpoint(path, ToTensors(p, config_hash));
}

DynamicsParams LoadDynamics(const std::string& path) {
  return FromTensors(ReadCheckpoint(path));
}

std::uint64_t GroupHash(const DynamicsParams& p, const std::string& group) {
  return Fnv1a(p.GroupValues(group));
}

}  // namespace dynsim
