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

// MSNN parameter checkpoints.
//
//   "MSNN"                    4 bytes magic
//   version                   u32 (= 1)
//   repeated until EOF:
//     name length             u32
//     name                    UTF-8 bytes
//     rank                    u32
//     dims                    u32 x rank
//     payload                 f64 x prod(dims)
//
// All integers and floats are little-endian.

#ifndef DYNSIM_NN_CHECKPOINT_H_
#define DYNSIM_NN_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dynsim {

inline constexpr char kCheckpointMagic[4] = {'M', 'S', 'N', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;

  bool operator==(const NamedTensor&) const = default;
};

std::string EncodeCheckpoint(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> DecodeCheckpoint(std::string_view bytes);

void WriteCheckpoint(const std::string& path,
                     const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> ReadCheckpoint(const std::string& path);

// Lookup helpers; Find returns nullptr when absent, Get throws FormatError.
const NamedTensor* FindTensor(const std::vector<NamedTensor>& tensors,
                              std::string_view name);
const NamedTensor& GetTensor(const std::vector<NamedTensor>& tensors,
                             std::string_view name);

}  // namespace dynsim

#endif  // DYNSIM_NN_CHECKPOINT_H_
