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

// Learned continuous-time dynamics for state s = (q, qdot):
//
//   ds/dt = ( qdot,
//             c * [ M(q) (b(q, qdot) + tau(a)) + sum_i eps_i(q, qdot, a) ] )
//
// where M = L L^T is assembled from the position encoder's output, b is the
// state encoder, tau the action encoder and eps_i the active correctors.
// c is a fixed acceleration scale fitted from data (a unit conversion that
// keeps the positive-semidefinite structure of M). All network inputs are
// standardized with fixed dataset statistics.
//
// A plain residual network over (q, qdot, a) predicting the whole ds/dt is
// available as an unstructured baseline.

#ifndef DYNSIM_DYNAMICS_MODEL_H_
#define DYNSIM_DYNAMICS_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dynsim/common.h"
#include "dynsim/nn/checkpoint.h"
#include "dynsim/nn/matrix.h"
#include "dynsim/nn/network.h"

namespace dynsim {

struct StateDims {
  std::size_t dq = 0;
  std::size_t dv = 0;
  std::size_t da = 0;

  std::size_t state() const { return dq + dv; }
  bool operator==(const StateDims&) const = default;
};

inline std::size_t TriangularSize(std::size_t n) { return n * (n + 1) / 2; }

enum class ModelKind : std::uint8_t { kStructured = 0, kPlainResNet = 1 };

// Block counts and hidden widths of every sub-network.
struct ModelSize {
  std::size_t position_blocks = 2, position_hidden = 32;
  std::size_t state_blocks = 2, state_hidden = 32;
  std::size_t action_blocks = 1, action_hidden = 16;
  std::size_t correctors = 0;
  std::size_t corrector_blocks = 2, corrector_hidden = 32;
  Activation corrector_activation = Activation::kTanh;

  // Named presets: small, medium, large and desk.
  static ModelSize Small();
  static ModelSize Medium();
  static ModelSize Large();
  static ModelSize Desk();  // default; sized for single-core training
  static ModelSize ByName(const std::string& name);
};

struct ModelArchitecture {
  ModelKind kind = ModelKind::kStructured;
  StateDims dims;
  ResNetShape position_encoder;  // q -> dv(dv+1)/2 entries of L
  ResNetShape state_encoder;     // (q, qdot) -> dv
  MlpShape action_encoder;       // a -> dv
  std::vector<ResNetShape> correctors;  // (q, qdot, a) -> dv
  ResNetShape plain;             // (q, qdot, a) -> dq + dv  (baseline only)
  // Per position coordinate; nonzero entries are angles that enter every
  // network as (sin q, cos q) instead of the standardized value. Empty means
  // no periodic coordinates.
  std::vector<std::uint8_t> periodic;

  std::size_t periodic_count() const;
  std::size_t position_features() const { return dims.dq + periodic_count(); }
  std::size_t state_features() const { return dims.state() + periodic_count(); }

  bool operator==(const ModelArchitecture&) const = default;
};

ModelArchitecture MakeStructuredArchitecture(
    const StateDims& dims, const ModelSize& size,
    const std::vector<std::uint8_t>& periodic = {});
// Picks the largest hidden width whose parameter count does not exceed
// target_params (blocks fixed), matching a structured model's budget.
ModelArchitecture MakePlainArchitecture(
    const StateDims& dims, std::size_t blocks, std::size_t target_params,
    const std::vector<std::uint8_t>& periodic = {});

// Contiguous slice of the flat parameter vector owned by one network.
struct ParamGroup {
  std::string name;  // "pos_enc", "state_enc", "act_enc", "corr{i}", "plain"
  std::size_t offset = 0;
  std::size_t size = 0;
};

std::vector<ParamGroup> ParamGroups(const ModelArchitecture& arch);

// Fixed input standardization and output scale.
struct Normalization {
  std::vector<double> state_mean, state_scale;    // length dq + dv
  std::vector<double> action_mean, action_scale;  // length da
  double acceleration_scale = 1.0;                // structured models
  std::vector<double> derivative_scale;           // plain models, dq + dv

  static Normalization Identity(const StateDims& dims);
  bool operator==(const Normalization&) const = default;
};

struct DynamicsParams {
  ModelArchitecture arch;
  Normalization norm;
  std::vector<double> values;
  std::size_t active_correctors = 0;

  std::size_t ParamCount() const { return values.size(); }
  const ParamGroup& Group(const std::string& name) const;
  std::span<double> GroupValues(const std::string& name);
  std::span<const double> GroupValues(const std::string& name) const;
  const std::vector<ParamGroup>& groups() const { return groups_; }

  // Recomputes group offsets after arch changes; values keep their size.
  void RebuildGroups();

 private:
  std::vector<ParamGroup> groups_;
};

// Fresh parameters with the standard initialization; corrector output
// projections start at zero so every corrector is initially the zero function.
DynamicsParams InitDynamicsParams(const ModelArchitecture& arch, Rng& rng);

// Which parameter groups receive gradients. Frozen groups are skipped (their
// gradient entries stay exactly zero).
struct GradMask {
  bool position = true;
  bool state = true;
  bool action = true;
  bool plain = true;
  std::vector<bool> correctors;  // missing entries count as trainable

  static GradMask All() { return {}; }
  static GradMask None(std::size_t n_correctors);
  bool corrector(std::size_t i) const {
    return i >= correctors.size() || correctors[i];
  }
};

// Lower-triangular L filled row by row from l_flat; returns M = L L^T,
// accumulated once per (i <= j) pair and mirrored so M is exactly symmetric.
Matrix AssembleMassInverse(std::span<const double> l_flat);

// (qdot, c * M (b + tau)): predictor only.
void PredictorDerivative(const DynamicsParams& p, std::span<const double> s,
                         std::span<const double> a, std::span<double> ds);
// Predictor plus the first active_correctors correctors (plain models: the
// baseline network).
void FullDerivative(const DynamicsParams& p, std::span<const double> s,
                    std::span<const double> a, std::span<double> ds);
std::vector<double> FullDerivative(const DynamicsParams& p,
                                   std::span<const double> s,
                                   std::span<const double> a);

// Accumulates u^T d(FullDerivative)/d(theta, s, a). grad_theta has
// ParamCount() entries; any output span may be empty to skip it.
void DynamicsVjp(const DynamicsParams& p, std::span<const double> s,
                 std::span<const double> a, std::span<const double> cotangent,
                 std::span<double> grad_theta, std::span<double> grad_s,
                 std::span<double> grad_a, const GradMask& mask = {});

struct DynamicsGradients {
  std::vector<double> theta, s, a;
};
DynamicsGradients DynamicsVjp(const DynamicsParams& p,
                              std::span<const double> s,
                              std::span<const double> a,
                              std::span<const double> cotangent);

// Checkpoint conversion. Tensor names: "pos_enc.*", "state_enc.*",
// "act_enc.*", "corr{i}.*", "plain.*", plus "norm.*" and "meta.*".
std::vector<NamedTensor> ToTensors(const DynamicsParams& p,
                                   std::uint64_t config_hash = 0);
DynamicsParams FromTensors(const std::vector<NamedTensor>& tensors);
std::uint64_t CheckpointConfigHash(const std::vector<NamedTensor>& tensors);

void SaveDynamics(const std::string& path, const DynamicsParams& p,
                  std::uint64_t config_hash = 0);
DynamicsParams LoadDynamics(const std::string& path);

// Hash of one group's parameter bytes (freeze checks).
std::uint64_t GroupHash(const DynamicsParams& p, const std::string& group);

}  // namespace dynsim

#endif  // DYNSIM_DYNAMICS_MODEL_H_
