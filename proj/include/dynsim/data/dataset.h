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

// Trajectory datasets and the MOSIMTRJ file format.
//
//   "MOSIMTRJ"        8 bytes magic
//   version           u32 (= 1)
//   env name          u32 length + UTF-8 bytes
//   D_q, D_v, D_a     u32 each
//   dt                f64
//   config hash       u64 (0 when unknown)
//   segment count     u32
//   per segment:
//     n               u32 steps
//     states          f64 x (n + 1) x (D_q + D_v)
//     actions         f64 x n x D_a
//     source tag      u8 (0 random, 1 policy)
//
// All values little-endian.

#ifndef DYNSIM_DATA_DATASET_H_
#define DYNSIM_DATA_DATASET_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dynsim/common.h"
#include "dynsim/data/segment.h"
#include "dynsim/dynamics/model.h"
#include "dynsim/envs/env.h"
#include "dynsim/parallel/execution.h"

namespace dynsim {

inline constexpr char kDatasetMagic[8] = {'M', 'O', 'S', 'I', 'M', 'T', 'R', 'J'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kWarmInSteps = 100;

struct Dataset {
  std::string env;
  StateDims dims;
  double dt = 0.0;
  std::uint64_t config_hash = 0;
  std::vector<TrajectorySegment> segments;

  std::size_t TotalSteps() const;
  bool operator==(const Dataset&) const = default;
};

std::string EncodeDataset(const Dataset& d);
Dataset DecodeDataset(std::string_view bytes);
void WriteDataset(const std::string& path, const Dataset& d);
Dataset ReadDataset(const std::string& path);

// n_traj trajectories of `steps` control steps each; trajectory i draws its
// initial state and actions from Rng(MixSeed(seed, i)), so the result does
// not depend on the execution mode.
Dataset GenerateDataset(const Env& env, const ActionSamplerSpec& sampler,
                        std::size_t n_traj, std::size_t steps,
                        std::uint64_t seed, Execution exec = Execution::kParallel);

// Splits whole trajectories: the last n_val (after a seeded shuffle) go to
// the second dataset.
std::pair<Dataset, Dataset> SplitDataset(const Dataset& d, std::size_t n_val,
                                         std::uint64_t seed);

// Window of `horizon` steps starting at or after `warm_in`.
struct WindowRef {
  std::size_t segment = 0;
  std::size_t start = 0;
};

// Uniformly chosen eligible windows (with replacement). Throws ConfigError
// when no segment is long enough.
std::vector<WindowRef> SampleWindows(const Dataset& d, std::size_t horizon,
                                     std::size_t count, Rng& rng,
                                     std::size_t warm_in = kWarmInSteps);
std::vector<TrajectorySegment> MaterializeWindows(
    const Dataset& d, const std::vector<WindowRef>& refs, std::size_t horizon);

// Per-dimension mean and standard deviation of all stored states (and
// actions). Zero deviations are replaced by 1.
struct DatasetStats {
  std::vector<double> state_mean, state_std, action_mean, action_std;
};
DatasetStats ComputeStats(const Dataset& d);

// I.i.d. N(0, sigma^2) on every state entry; actions untouched.
Dataset AddObservationNoise(const Dataset& d, double sigma, std::uint64_t seed);

}  // namespace dynsim

#endif  // DYNSIM_DATA_DATASET_H_
