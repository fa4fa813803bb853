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

#include "dynsim/data/benchmark.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace dynsim {

BenchmarkResult RolloutMse(const ControlledSystem& model,
                           const std::vector<TrajectorySegment>& windows,
                           std::span<const double> state_std,
                           const std::vector<std::size_t>& horizons,
                           const RolloutOptions& rollout, Execution exec) {
  if (horizons.empty()) throw ConfigError("no horizons requested");
  const std::size_t h_max = *std::max_element(horizons.begin(), horizons.end());
  const std::size_t ds = model.state_dim();
  if (state_std.size() != ds) throw DimensionError("state_std length");
  for (const TrajectorySegment& w : windows) {
    if (w.steps() < h_max)
      throw DimensionError("window shorter than the longest horizon");
    if (w.state_dim != ds || w.action_dim != model.action_dim())
      throw DimensionError("window dims differ from the model");
  }

  // Per-window per-step errors; reduced in window order afterwards.
  struct Slot {
    bool ok = false;
    std::vector<double> raw, norm;
  };
  std::vector<Slot> slots(windows.size());
  RolloutOptions opts = rollout;
  opts.record = false;
  ForEachIndex(exec, windows.size(), [&](std::size_t i) {
    const TrajectorySegment& w = windows[i];
    Slot& slot = slots[i];
    Rollout r;
    try {
      r = IntegrateControlled(model, w.state(0), w.action_block(0, h_max), w.dt,
                              opts);
    } catch (const IntegrationError&) {
      return;
    }
    slot.raw.resize(h_max);
    slot.norm.resize(h_max);
    for (std::size_t k = 1; k <= h_max; ++k) {
      double raw = 0.0, norm = 0.0;
      auto truth = w.state(k);
      for (std::size_t d = 0; d < ds; ++d) {
        const double e = r.states[k][d] - truth[d];
        raw += e * e;
        norm += (e / state_std[d]) * (e / state_std[d]);
      }
      slot.raw[k - 1] = raw / static_cast<double>(ds);
      slot.norm[k - 1] = norm / static_cast<double>(ds);
    }
    slot.ok = std::all_of(slot.raw.begin(), slot.raw.end(),
                          [](double v) { return std::isfinite(v); });
  });

  BenchmarkResult res;
  res.step_mse.assign(h_max, 0.0);
  res.step_mse_normalized.assign(h_max, 0.0);
  for (const Slot& s : slots) {
    if (!s.ok) {
      ++res.n_failed;
      continue;
    }
    ++res.n_segments;
    for (std::size_t k = 0; k < h_max; ++k) {
      res.step_mse[k] += s.raw[k];
      res.step_mse_normalized[k] += s.norm[k];
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(res.n_segments, 1));
  for (std::size_t k = 0; k < h_max; ++k) {
    res.step_mse[k] /= n;
    res.step_mse_normalized[k] /= n;
  }
  for (std::size_t h : horizons) {
    HorizonScore sc;
    sc.horizon = h;
    if (res.n_segments == 0) {
      sc.mse = sc.mse_normalized = std::nan("");
    } else {
      for (std::size_t k = 0; k < h; ++k) {
        sc.mse += res.step_mse[k];
        sc.mse_normalized += res.step_mse_normalized[k];
      }
      sc.mse /= static_cast<double>(h);
      sc.mse_normalized /= static_cast<double>(h);
    }
    res.scores.push_back(sc);
  }
  return res;
}

BenchmarkResult BenchmarkDataset(const ControlledSystem& model,
                                 const Dataset& data,
                                 const BenchmarkOptions& opts) {
  if (opts.horizons.empty()) throw ConfigError("no horizons requested");
  const std::size_t h_max =
      *std::max_element(opts.horizons.begin(), opts.horizons.end());
  Rng rng(opts.seed);
  const auto refs = SampleWindows(data, h_max, opts.n_eval, rng, opts.warm_in);
  const DatasetStats stats = ComputeStats(data);
  return RolloutMse(model, MaterializeWindows(data, refs, h_max),
                    stats.state_std, opts.horizons, opts.rollout, opts.exec);
}

nlohmann::json BenchmarkReportJson(const BenchmarkResult& r,
                                   const std::string& env,
                                   const std::string& model,
                                   std::uint64_t config_hash) {
  nlohmann::json out = nlohmann::json::array();
  for (const HorizonScore& s : r.scores) {
    nlohmann::json rec;
    rec["env"] = env;
    rec["model"] = model;
    rec["horizon"] = s.horizon;
    // JSON has no NaN; a horizon with no surviving windows reports null.
    rec["mse"] = std::isfinite(s.mse) ? nlohmann::json(s.mse) : nlohmann::json();
    rec["mse_normalized"] = std::isfinite(s.mse_normalized)
                                ? nlohmann::json(s.mse_normalized)
                                : nlohmann::json();
    rec["n_segments"] = r.n_segments;
    rec["n_failed"] = r.n_failed;
    rec["config_hash"] = HexHash(config_hash);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace dynsim
