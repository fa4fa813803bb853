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

#include "dynsim/nn/checkpoint.h"

#include <string>

#include "dynsim/common.h"
#include "dynsim/io/binary.h"

namespace dynsim {

std::string EncodeCheckpoint(const std::vector<NamedTensor>& tensors) {
  ByteWriter w;
  w.Bytes(std::string_view(kCheckpointMagic, 4));
  w.U32(kCheckpointVersion);
  for (const NamedTensor& t : tensors) {
    std::size_t n = 1;
    for (std::uint32_t d : t.dims) n *= d;
    if (n != t.values.size()) {
      throw DimensionError("tensor '" + t.name + "' dims do not match payload");
    }
    w.String(t.name);
    w.U32(static_cast<std::uint32_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) w.U32(d);
    w.F64s(t.values);
  }
  return w.Release();
}

std::vector<NamedTensor> DecodeCheckpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.Bytes(4, "magic") != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError("bad checkpoint magic", 0);
  }
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.U32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " +
                          std::to_string(version),
                      version_at);
  }
  std::vector<NamedTensor> out;
  while (!r.AtEnd()) {
    NamedTensor t;
    t.name = r.String("tensor name");
    const std::uint64_t rank_at = r.offset();
    const std::uint32_t rank = r.U32("tensor rank");
    if (rank > 8) throw FormatError("implausible tensor rank", rank_at);
    std::uint64_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.dims.push_back(r.U32("tensor dims"));
      n *= t.dims.back();
    }
    if (n * 8 > r.Remaining()) {
      throw FormatError("truncated payload for tensor '" + t.name + "'",
                        r.offset());
    }
    t.values.resize(n);
    r.F64s(t.values, "tensor payload");
    out.push_back(std::move(t));
  }
  return out;
}

void WriteCheckpoint(const std::string& path,
                     const std::vector<NamedTensor>& tensors) {
  WriteFileBytes(path, EncodeCheckpoint(tensors));
}

std::vector<NamedTensor> ReadCheckpoint(const std::string& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

const NamedTensor* FindTensor(const std::vector<NamedTensor>& tensors,
                              std::string_view name) {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

const NamedTensor& GetTensor(const std::vector<NamedTensor>& tensors,
                             std::string_view name) {
  const NamedTensor* t = FindTensor(tensors, name);
  if (t == nullptr) {
    throw FormatError("checkpoint lacks tensor '" + std::string(name) + "'", 0);
  }
  return *t;
}

}  // namespace dynsim
