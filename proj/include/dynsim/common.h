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

#ifndef DYNSIM_COMMON_H_
#define DYNSIM_COMMON_H_

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dynsim {

// Error hierarchy. The CLI maps these onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of vectors, matrices or networks do not compose.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration (unknown env, bad flag, schema).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed binary or JSON input; carries the byte offset of the fault.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// An integrator could not advance. Carries the last accepted (t, state).
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t, std::vector<double> state)
      : Error(what), t_(t), state_(std::move(state)) {}
  double t() const { return t_; }
  const std::vector<double>& state() const { return state_; }

 private:
  double t_;
  std::vector<double> state_;
};

// Non-finite loss or gradient during optimization.
class TrainingFault : public Error {
 public:
  using Error::Error;
};

// Non-finite intermediate inside a density model.
class DensityFault : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// 64-bit FNV-1a.
inline std::uint64_t Fnv1a(std::string_view bytes,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t Fnv1a(std::span<const double> values,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  return Fnv1a(std::string_view(reinterpret_cast<const char*>(values.data()),
                                values.size() * sizeof(double)),
               h);
}

std::string HexHash(std::uint64_t h);

bool AllFinite(std::span<const double> v);

}  // namespace dynsim

#endif  // DYNSIM_COMMON_H_
