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

#ifndef DYNSIM_PARALLEL_EXECUTION_H_
#define DYNSIM_PARALLEL_EXECUTION_H_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace dynsim {

// Selects between the plain serial loop and the OpenMP work-sharing loop for
// the batch kernels. Both produce bit-identical results: per-item outputs are
// written to their own slots and reduced afterwards in index order.
enum class Execution : std::uint8_t { kSerial, kParallel };

// Sets the OpenMP worker count (0 leaves the runtime default).
void SetThreadCount(int threads);
int ThreadCount();

// Runs body(i) for i in [0, n). An exception escaping body is captured and
// rethrown on the calling thread after the loop (lowest index wins).
template <typename Body>
void ForEachIndex(Execution exec, std::size_t n, Body&& body) {
  if (exec == Execution::kSerial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const long long count = static_cast<long long>(n);
  std::exception_ptr error;
  long long error_index = count;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace dynsim

#endif  // DYNSIM_PARALLEL_EXECUTION_H_
