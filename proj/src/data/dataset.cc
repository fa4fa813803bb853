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

#include "dynsim/data/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dynsim/io/binary.h"

namespace dynsim {

std::size_t Dataset::TotalSteps() const {
  std::size_t n = 0;
  for (const TrajectorySegment& s : segments) n += s.steps();
  return n;
}

std::string EncodeDataset(const Dataset& d) {
  ByteWriter w;
  w.Bytes(std::string_view(kDatasetMagic, 8));
  w.U32(kDatasetVersion);
  w.String(d.env);
  w.U32(static_cast<std::uint32_t>(d.dims.dq));
  w.U32(static_cast<std::uint32_t>(d.dims.dv));
  w.U32(static_cast<std::uint32_t>(d.dims.da));
  w.F64(d.dt);
  w.U64(d.config_hash);
  w.U32(static_cast<std::uint32_t>(d.segments.size()));
  for (const TrajectorySegment& s : d.segments) {
    if (s.state_dim != d.dims.state() || s.action_dim != d.dims.da)
      throw DimensionError("segment dims differ from dataset header");
    s.Validate();
    w.U32(static_cast<std::uint32_t>(s.steps()));
    w.F64s(s.states);
    w.F64s(s.actions);
    w.U8(static_cast<std::uint8_t>(s.tag));
  }
  return w.Release();
}

Dataset DecodeDataset(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.Bytes(8, "magic") != std::string_view(kDatasetMagic, 8))
    throw FormatError("bad dataset magic", 0);
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.U32("version");
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version),
                      version_at);
  }
  Dataset d;
  d.env = r.String("env name");
  d.dims.dq = r.U32("D_q");
  d.dims.dv = r.U32("D_v");
  d.dims.da = r.U32("D_a");
  d.dt = r.F64("dt");
  d.config_hash = r.U64("config hash");
  const std::uint32_t count = r.U32("segment count");
  const std::size_t ds = d.dims.state(), da = d.dims.da;
  for (std::uint32_t i = 0; i < count; ++i) {
    TrajectorySegment s;
    s.dt = d.dt;
    s.state_dim = ds;
    s.action_dim = da;
    const std::uint64_t n = r.U32("segment length");
    const std::uint64_t need = ((n + 1) * ds + n * da) * 8 + 1;
    if (need > r.Remaining()) {
      throw FormatError("truncated segment " + std::to_string(i), r.offset());
    }
    s.states.resize((n + 1) * ds);
    s.actions.resize(n * da);
    r.F64s(s.states, "states");
    r.F64s(s.actions, "actions");
    const std::uint64_t tag_at = r.offset();
    const std::uint8_t tag = r.U8("source tag");
    if (tag > 1) throw FormatError("invalid source tag", tag_at);
    s.tag = static_cast<SourceTag>(tag);
    d.segments.push_back(std::move(s));
  }
  if (!r.AtEnd()) throw FormatError("trailing bytes after dataset", r.offset());
  return d;
}

void WriteDataset(const std::string& path, const Dataset& d) {
  WriteFileBytes(path, EncodeDataset(d));
}

Dataset ReadDataset(const std::string& path) {
  return DecodeDataset(ReadFileBytes(path));
}

Dataset GenerateDataset(const Env& env, const ActionSamplerSpec& sampler,
                        std::size_t n_traj, std::size_t steps,
                        std::uint64_t seed, Execution exec) {
  const EnvSpec& spec = env.spec();
  Dataset d;
  d.env = spec.name;
  d.dims = spec.dims;
  d.dt = spec.dt;
  d.segments.resize(n_traj);
  ForEachIndex(exec, n_traj, [&](std::size_t i) {
    Rng rng(MixSeed(seed, i));
    const std::vector<double> s0 = env.SampleInitialState(rng);
    const std::vector<double> actions = SampleActions(
        sampler, spec.action_low, spec.action_high, steps, spec.dt, rng);
    d.segments[i] = GenerateTrajectory(env, s0, actions, steps);
  });
  return d;
}

std::pair<Dataset, Dataset> SplitDataset(const Dataset& d, std::size_t n_val,
                                         std::uint64_t seed) {
  if (n_val > d.segments.size())
    throw ConfigError("validation split larger than dataset");
  std::vector<std::size_t> order(d.segments.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Dataset train = d, val = d;
  train.segments.clear();
  val.segments.clear();
  const std::size_t n_train = d.segments.size() - n_val;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train : val).segments.push_back(d.segments[order[i]]);
  }
  return {std::move(train), std::move(val)};
}

std::vector<WindowRef> SampleWindows(const Dataset& d, std::size_t horizon,
                                     std::size_t count, Rng& rng,
                                     std::size_t warm_in) {
  // Number of admissible start positions per segment.
  std::vector<std::size_t> slots(d.segments.size(), 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < d.segments.size(); ++i) {
    const std::size_t n = d.segments[i].steps();
    if (n >= warm_in + horizon) slots[i] = n - warm_in - horizon + 1;
    total += slots[i];
  }
  if (total == 0) {
    throw ConfigError("no segment has " + std::to_string(warm_in + horizon) +
                      " steps (warm-in " + std::to_string(warm_in) +
                      " + horizon " + std::to_string(horizon) + ")");
  }
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  std::vector<WindowRef> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t k = pick(rng), i = 0;
    while (k >= slots[i]) k -= slots[i++];
    out.push_back({i, warm_in + k});
  }
  return out;
}

std::vector<TrajectorySegment> MaterializeWindows(
    const Dataset& d, const std::vector<WindowRef>& refs, std::size_t horizon) {
  std::vector<TrajectorySegment> out;
  out.reserve(refs.size());
  for (const WindowRef& r : refs)
    out.push_back(d.segments.at(r.segment).Window(r.start, horizon));
  return out;
}

DatasetStats ComputeStats(const Dataset& d) {
  const std::size_t ds = d.dims.state(), da = d.dims.da;
  DatasetStats st;
  std::vector<double> s_sum(ds, 0.0), s_sq(ds, 0.0), a_sum(da, 0.0),
      a_sq(da, 0.0);
  double ns = 0, na = 0;
  for (const TrajectorySegment& seg : d.segments) {
    for (std::size_t k = 0; k <= seg.steps(); ++k) {
      auto s = seg.state(k);
      for (std::size_t i = 0; i < ds; ++i) {
        s_sum[i] += s[i];
        s_sq[i] += s[i] * s[i];
      }
      ++ns;
    }
    for (std::size_t k = 0; k < seg.steps(); ++k) {
      auto a = seg.action(k);
      for (std::size_t i = 0; i < da; ++i) {
        a_sum[i] += a[i];
        a_sq[i] += a[i] * a[i];
      }
      ++na;
    }
  }
  auto finish = [](const std::vector<double>& sum, const std::vector<double>& sq,
                   double n, std::vector<double>& mean, std::vector<double>& sd) {
    mean.assign(sum.size(), 0.0);
    sd.assign(sum.size(), 1.0);
    if (n == 0) return;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      mean[i] = sum[i] / n;
      const double var = std::max(0.0, sq[i] / n - mean[i] * mean[i]);
      sd[i] = var > 0 ? std::sqrt(var) : 1.0;
    }
  };
  finish(s_sum, s_sq, ns, st.state_mean, st.state_std);
  finish(a_sum, a_sq, na, st.action_mean, st.action_std);
  return st;
}

Dataset AddObservationNoise(const Dataset& d, double sigma, std::uint64_t seed) {
  if (sigma < 0) throw ConfigError("noise sigma must be >= 0");
  Dataset out = d;
  if (sigma == 0) return out;
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (TrajectorySegment& s : out.segments)
    for (double& v : s.states) v += noise(rng);
  return out;
}

}  // namespace dynsim
