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

#include "dynsim/train/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "json.hpp"

namespace dynsim {
namespace {

using Clock = std::chrono::steady_clock;

struct StageSpec {
  std::size_t steps = 0;
  std::size_t active_correctors = 0;
  GradMask mask;
  bool curriculum = false;
};

std::size_t CurriculumLength(const TrainConfig& cfg, std::size_t step,
                             std::size_t total) {
  std::size_t doublings = 0;
  while ((cfg.segment_length << (doublings + 1)) <= cfg.segment_length_max)
    ++doublings;
  if (doublings == 0 || total == 0) return cfg.segment_length;
  const std::size_t phase = step * (doublings + 1) / total;
  return std::min(cfg.segment_length_max, cfg.segment_length << phase);
}

double LearningRate(const TrainConfig& cfg, std::size_t step, std::size_t total) {
  if (!cfg.cosine_decay || total <= 1) return cfg.adam.lr;
  const double lo = cfg.adam.lr * cfg.lr_final_fraction;
  const double x = static_cast<double>(step) / static_cast<double>(total - 1);
  return lo + 0.5 * (cfg.adam.lr - lo) * (1.0 + std::cos(std::numbers::pi * x));
}

LossOptions MakeLossOptions(const TrainConfig& cfg, const Dataset& train) {
  LossOptions o;
  o.path = cfg.grad_path;
  o.rollout = cfg.rollout;
  o.adjoint = cfg.adjoint;
  if (cfg.normalized_loss) {
    const DatasetStats st = ComputeStats(train);
    for (double s : st.state_std) o.weights.push_back(1.0 / (s * s));
  }
  return o;
}

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const Dataset& train, const Dataset& val)
      : cfg_(cfg),
        train_(cfg.noise_sigma > 0
                   ? AddObservationNoise(train, cfg.noise_sigma,
                                         MixSeed(cfg.seed, 0x6e6f697365ULL))
                   : train),
        loss_opts_(MakeLossOptions(cfg, train)),
        rng_(MixSeed(cfg.seed, 0x747261696eULL)),
        start_(Clock::now()) {
    if (!val.segments.empty() && cfg.val_every > 0) {
      const std::size_t h = *std::max_element(cfg.val_horizons.begin(),
                                              cfg.val_horizons.end());
      Rng vr(MixSeed(cfg.seed, 0x76616cULL));
      val_windows_ = MaterializeWindows(
          val, SampleWindows(val, h, cfg.n_val_windows, vr, cfg.warm_in), h);
      val_std_ = ComputeStats(val).state_std;
    }
    if (!cfg.log_path.empty()) {
      log_file_.open(cfg.log_path, std::ios::trunc);
      if (!log_file_) throw ConfigError("cannot open log '" + cfg.log_path + "'");
    }
  }

  TrainResult Run(DynamicsParams p, const std::vector<StageSpec>& stages) {
    TrainResult res;
    std::size_t global = 0;
    for (std::size_t si = 0; si < stages.size(); ++si) {
      const StageSpec& st = stages[si];
      p.active_correctors = st.active_correctors;
      res.log.stage_starts.push_back(global);
      AdamState adam(p.ParamCount(), cfg_.adam);
      for (std::size_t k = 0; k < st.steps; ++k, ++global) {
        const std::size_t len = st.curriculum ? CurriculumLength(cfg_, k, st.steps)
                                              : cfg_.segment_length_max;
        const auto refs =
            SampleWindows(train_, len, cfg_.batch_size, rng_, cfg_.warm_in);
        const auto batch = MaterializeWindows(train_, refs, len);
        BatchLoss bl =
            BatchSegmentLoss(p, batch, loss_opts_, st.mask, true, cfg_.exec);
        double norm = 0.0;
        for (double g : bl.grad) norm += g * g;
        norm = std::sqrt(norm);
        if (!std::isfinite(bl.loss) || !std::isfinite(norm)) {
          throw TrainingFault("non-finite loss at step " + std::to_string(global));
        }
        if (cfg_.clip_norm > 0 && norm > cfg_.clip_norm) {
          const double s = cfg_.clip_norm / norm;
          for (double& g : bl.grad) g *= s;
        }
        const double lr = LearningRate(cfg_, k, st.steps);
        AdamStep(adam, p.values, bl.grad, lr);
        StepLog sl{global, si + 1, bl.loss, lr, norm, len};
        res.log.steps.push_back(sl);
        WriteStep(sl);
        const std::size_t done = global + 1;
        if (cfg_.val_every > 0 && done % cfg_.val_every == 0)
          Validate(p, done, si + 1, res.log);
        if (!cfg_.checkpoint_dir.empty() && cfg_.checkpoint_every > 0 &&
            done % cfg_.checkpoint_every == 0) {
          SaveDynamics(CheckpointPath(done), p, cfg_.config_hash);
        }
      }
    }
    if (res.log.validation.empty() || res.log.validation.back().step != global)
      Validate(p, global, stages.size(), res.log);
    res.log.seconds = Seconds();
    res.params = std::move(p);
    return res;
  }

 private:
  double Seconds() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  std::string CheckpointPath(std::size_t step) const {
    std::filesystem::create_directories(cfg_.checkpoint_dir);
    return (std::filesystem::path(cfg_.checkpoint_dir) /
            ("step_" + std::to_string(step) + ".msnn"))
        .string();
  }

  void WriteStep(const StepLog& s) {
    if (!log_file_.is_open()) return;
    nlohmann::json j = {{"step", s.step},       {"stage", s.stage},
                        {"loss", s.loss},       {"lr", s.lr},
                        {"grad_norm", s.grad_norm},
                        {"segment_length", s.segment_length},
                        {"seconds", Seconds()}};
    log_file_ << j.dump() << '\n';
  }

  void Validate(const DynamicsParams& p, std::size_t step, std::size_t stage,
                TrainLog& log) {
    if (val_windows_.empty()) return;
    ModelSystem sys(p);
    const BenchmarkResult r = RolloutMse(sys, val_windows_, val_std_,
                                         cfg_.val_horizons, cfg_.rollout, cfg_.exec);
    log.validation.push_back({step, stage, r.scores, r.n_failed});
    if (!log_file_.is_open()) return;
    nlohmann::json j = {{"step", step}, {"stage", stage}, {"n_failed", r.n_failed}};
    for (const HorizonScore& s : r.scores) {
      j["val_mse_" + std::to_string(s.horizon)] = s.mse;
      j["val_mse_normalized_" + std::to_string(s.horizon)] = s.mse_normalized;
    }
    log_file_ << j.dump() << '\n';
  }

  const TrainConfig& cfg_;
  Dataset train_;
  LossOptions loss_opts_;
  Rng rng_;
  Clock::time_point start_;
  std::vector<TrajectorySegment> val_windows_;
  std::vector<double> val_std_;
  std::ofstream log_file_;
};

}  // namespace

GradPath ParseGradPath(const std::string& name) {
  if (name == "backprop_steps") return GradPath::kBackprop;
  if (name == "adjoint") return GradPath::kAdjoint;
  throw ConfigError("unknown gradient path '" + name + "'");
}

const char* GradPathName(GradPath p) {
  return p == GradPath::kAdjoint ? "adjoint" : "backprop_steps";
}

double SegmentLoss(const DynamicsParams& p, const TrajectorySegment& seg,
                   const LossOptions& opts, const GradMask& mask,
                   std::span<double> grad_theta) {
  if (seg.state_dim != p.arch.dims.state() ||
      seg.action_dim != p.arch.dims.da) {
    throw DimensionError("segment dims differ from model");
  }
  return SegmentLoss(ModelSystem(p, mask), seg, opts, grad_theta);
}

double SegmentLoss(const ControlledSystem& sys, const TrajectorySegment& seg,
                   const LossOptions& opts, std::span<double> grad_theta) {
  const std::size_t n = seg.steps(), ds = seg.state_dim;
  if (n == 0) throw ConfigError("segment length must be >= 1");
  if (ds != sys.state_dim()) throw DimensionError("segment state width");
  if (!opts.weights.empty() && opts.weights.size() != ds)
    throw DimensionError("loss weight count");
  const auto* diff = dynamic_cast<const DifferentiableSystem*>(&sys);
  if (!grad_theta.empty() && diff == nullptr)
    throw ConfigError("gradients need a differentiable system");
  RolloutOptions ro = opts.rollout;
  ro.record = !grad_theta.empty() && opts.path == GradPath::kBackprop;
  Rollout r;
  try {
    r = IntegrateControlled(sys, seg.state(0), seg.actions, seg.dt, ro);
  } catch (const IntegrationError& e) {
    throw TrainingFault(std::string("segment rollout failed: ") + e.what());
  }
  const double denom = static_cast<double>(n * ds);
  double loss = 0.0;
  std::vector<double> dl(grad_theta.empty() ? 0 : (n + 1) * ds, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    auto truth = seg.state(k);
    for (std::size_t d = 0; d < ds; ++d) {
      const double w = opts.weights.empty() ? 1.0 : opts.weights[d];
      const double e = r.states[k][d] - truth[d];
      loss += w * e * e;
      if (!dl.empty()) dl[k * ds + d] = 2.0 * w * e / denom;
    }
  }
  loss /= denom;
  if (!std::isfinite(loss)) throw TrainingFault("non-finite segment loss");
  if (grad_theta.empty()) return loss;
  try {
    if (opts.path == GradPath::kBackprop) {
      BackpropRollout(*diff, r, seg.actions, dl, grad_theta);
    } else {
      AdjointRollout(*diff, r, seg.actions, seg.dt, dl, opts.adjoint,
                     grad_theta);
    }
  } catch (const IntegrationError& e) {
    throw TrainingFault(std::string("adjoint solve failed: ") + e.what());
  }
  return loss;
}

BatchLoss BatchSegmentLoss(const DynamicsParams& p,
                           const std::vector<TrajectorySegment>& batch,
                           const LossOptions& opts, const GradMask& mask,
                           bool with_grad, Execution exec) {
  const std::size_t np = p.ParamCount();
  std::vector<double> losses(batch.size(), 0.0);
  std::vector<std::vector<double>> grads(with_grad ? batch.size() : 0);
  ForEachIndex(exec, batch.size(), [&](std::size_t i) {
    if (with_grad) grads[i].assign(np, 0.0);
    try {
      losses[i] = SegmentLoss(p, batch[i], opts, mask,
                              with_grad ? std::span<double>(grads[i])
                                        : std::span<double>());
    } catch (const TrainingFault& e) {
      throw TrainingFault("batch segment " + std::to_string(i) + ": " + e.what());
    }
  });
  BatchLoss out;
  const double inv = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
  for (double l : losses) out.loss += l;
  out.loss *= inv;
  if (with_grad) {
    out.grad.assign(np, 0.0);
    for (const auto& g : grads)
      for (std::size_t j = 0; j < np; ++j) out.grad[j] += g[j];
    for (double& g : out.grad) g *= inv;
  }
  return out;
}

Normalization FitNormalization(const ModelArchitecture& arch, const Dataset& d) {
  if (!(arch.dims == d.dims)) throw DimensionError("dataset dims differ from model");
  const DatasetStats st = ComputeStats(d);
  Normalization n;
  n.state_mean = st.state_mean;
  n.state_scale = st.state_std;
  n.action_mean = st.action_mean;
  n.action_scale = st.action_std;
  const std::size_t ds = d.dims.state(), dq = d.dims.dq;
  std::vector<double> sq(ds, 0.0);
  double count = 0;
  for (const TrajectorySegment& seg : d.segments) {
    for (std::size_t k = 0; k < seg.steps(); ++k) {
      auto a = seg.state(k), b = seg.state(k + 1);
      for (std::size_t i = 0; i < ds; ++i) {
        const double rate = (b[i] - a[i]) / seg.dt;
        sq[i] += rate * rate;
      }
      ++count;
    }
  }
  n.derivative_scale.assign(ds, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < ds; ++i) {
    const double rms = count > 0 ? std::sqrt(sq[i] / count) : 0.0;
    if (rms > 0) n.derivative_scale[i] = rms;
    if (i >= dq) acc += sq[i];
  }
  const double nv = static_cast<double>(ds - dq) * count;
  n.acceleration_scale = nv > 0 && acc > 0 ? std::sqrt(acc / nv) : 1.0;
  return n;
}

void TrainConfig::Validate() const {
  if (segment_length < 1) throw ConfigError("segment_length must be >= 1");
  if (segment_length_max < segment_length)
    throw ConfigError("segment_length_max must be >= segment_length");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (stage_steps.empty()) throw ConfigError("stage_steps must not be empty");
  if (val_horizons.empty()) throw ConfigError("val_horizons must not be empty");
  if (noise_sigma < 0) throw ConfigError("noise_sigma must be >= 0");
  if (!(adam.lr > 0)) throw ConfigError("learning rate must be > 0");
}

double TrainLog::FinalValidation(std::size_t horizon) const {
  if (validation.empty()) return std::nan("");
  for (const HorizonScore& s : validation.back().scores)
    if (s.horizon == horizon) return s.mse;
  return std::nan("");
}

TrainResult TrainMultistage(const TrainConfig& cfg, const Dataset& train,
                            const Dataset& val, DynamicsParams params0) {
  cfg.Validate();
  const std::size_t nc = params0.arch.correctors.size();
  if (params0.arch.kind == ModelKind::kStructured &&
      cfg.stage_steps.size() != 1 + nc) {
    throw ConfigError("stage_steps needs 1 + " + std::to_string(nc) +
                      " entries");
  }
  std::vector<StageSpec> stages;
  StageSpec first;
  first.steps = cfg.stage_steps[0];
  first.mask = GradMask::None(nc);
  first.mask.position = first.mask.state = first.mask.action = true;
  first.mask.plain = true;
  first.curriculum = true;
  stages.push_back(first);
  for (std::size_t k = 1; k < cfg.stage_steps.size(); ++k) {
    StageSpec s;
    s.steps = cfg.stage_steps[k];
    s.active_correctors = k;
    s.mask = GradMask::None(nc);
    s.mask.correctors[k - 1] = true;
    stages.push_back(s);
  }
  Trainer t(cfg, train, val);
  return t.Run(std::move(params0), stages);
}

TrainResult TrainEndToEnd(const TrainConfig& cfg, const Dataset& train,
                          const Dataset& val, DynamicsParams params0) {
  cfg.Validate();
  StageSpec all;
  for (std::size_t s : cfg.stage_steps) all.steps += s;
  all.active_correctors = params0.arch.correctors.size();
  all.mask = GradMask::All();
  all.curriculum = true;
  Trainer t(cfg, train, val);
  return t.Run(std::move(params0), {all});
}

}  // namespace dynsim
