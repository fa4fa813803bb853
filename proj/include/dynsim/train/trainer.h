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

// Segment-matching training of the learned dynamics.
//
// A training segment is integrated from its first recorded state under the
// recorded actions; the loss is the (optionally weighted) mean squared error
// against the recorded states at every control boundary. Gradients come from
// either the reverse sweep through the recorded steps or the continuous
// adjoint.

#ifndef DYNSIM_TRAIN_TRAINER_H_
#define DYNSIM_TRAIN_TRAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dynsim/data/benchmark.h"
#include "dynsim/data/dataset.h"
#include "dynsim/dynamics/model.h"
#include "dynsim/nn/adam.h"
#include "dynsim/ode/rollout.h"
#include "dynsim/parallel/execution.h"

namespace dynsim {

enum class GradPath { kBackprop, kAdjoint };

GradPath ParseGradPath(const std::string& name);  // "backprop_steps" | "adjoint"
const char* GradPathName(GradPath p);

struct LossOptions {
  GradPath path = GradPath::kBackprop;
  RolloutOptions rollout;
  IntegratorConfig adjoint;       // backward solve tolerances
  std::vector<double> weights;    // per state dimension; empty = all ones
};

// Loss of one segment; accumulates its gradient into grad_theta when
// non-empty. Integration failures raise TrainingFault.
double SegmentLoss(const DynamicsParams& p, const TrajectorySegment& seg,
                   const LossOptions& opts, const GradMask& mask,
                   std::span<double> grad_theta);

// Same loss for any controlled system; a non-empty grad_theta requires a
// DifferentiableSystem.
double SegmentLoss(const ControlledSystem& sys, const TrajectorySegment& seg,
                   const LossOptions& opts, std::span<double> grad_theta);

struct BatchLoss {
  double loss = 0.0;
  std::vector<double> grad;  // mean over the batch
};

// Per-segment gradients land in private slots and are summed in index
// order, so serial and parallel runs agree bit for bit.
BatchLoss BatchSegmentLoss(const DynamicsParams& p,
                           const std::vector<TrajectorySegment>& batch,
                           const LossOptions& opts, const GradMask& mask,
                           bool with_grad, Execution exec);

// Input standardization, acceleration scale (RMS of finite-difference
// accelerations) and per-dimension derivative scales from data.
Normalization FitNormalization(const ModelArchitecture& arch, const Dataset& d);

struct TrainConfig {
  std::size_t segment_length = 8;
  std::size_t segment_length_max = 32;  // first-stage curriculum target
  std::size_t batch_size = 16;
  std::vector<std::size_t> stage_steps = {2000};  // 1 + corrector count
  GradPath grad_path = GradPath::kBackprop;
  AdamConfig adam;
  bool cosine_decay = true;
  double lr_final_fraction = 0.05;
  double clip_norm = 0.0;  // <= 0 disables
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::size_t warm_in = kWarmInSteps;
  bool normalized_loss = false;  // weight dims by 1 / std^2
  std::size_t val_every = 500;
  std::vector<std::size_t> val_horizons = {16, 100};
  std::size_t n_val_windows = 64;
  std::size_t checkpoint_every = 1000;
  std::string checkpoint_dir;  // empty: no periodic checkpoints
  std::string log_path;        // empty: no JSON-lines log
  RolloutOptions rollout;
  IntegratorConfig adjoint;
  Execution exec = Execution::kParallel;
  std::uint64_t config_hash = 0;

  void Validate() const;
};

struct StepLog {
  std::size_t step = 0;
  std::size_t stage = 0;
  double loss = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
  std::size_t segment_length = 0;
};

struct ValidationLog {
  std::size_t step = 0;
  std::size_t stage = 0;
  std::vector<HorizonScore> scores;
  std::size_t n_failed = 0;
};

struct TrainLog {
  std::vector<StepLog> steps;
  std::vector<std::size_t> stage_starts;  // global step index of each stage
  std::vector<ValidationLog> validation;
  double seconds = 0.0;

  // Validation MSE at `horizon` from the last validation record.
  double FinalValidation(std::size_t horizon) const;
};

struct TrainResult {
  DynamicsParams params;
  TrainLog log;
};

// Stage 1 trains the predictor (active_correctors = 0) with the segment
// length curriculum; stage k >= 2 activates k - 1 correctors and trains
// only corrector k - 2, everything else frozen.
TrainResult TrainMultistage(const TrainConfig& cfg, const Dataset& train,
                            const Dataset& val, DynamicsParams params0);

// All groups trainable from step 0 with every corrector active; the budget
// is the sum of stage_steps.
TrainResult TrainEndToEnd(const TrainConfig& cfg, const Dataset& train,
                          const Dataset& val, DynamicsParams params0);

}  // namespace dynsim

#endif  // DYNSIM_TRAIN_TRAINER_H_
