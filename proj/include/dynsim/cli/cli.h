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

// Command-line front end. Subcommands: gen-data, train, benchmark, plan, lce,
// fit-flow, few-shot. Each takes --config plus flag overrides (flags win);
// reports are JSON on stdout, or in --out for the report-only commands.
//
// Exit codes: 0 ok, 2 configuration error, 3 malformed input file,
// 4 numerical failure, 1 anything else (I/O).

#ifndef DYNSIM_CLI_CLI_H_
#define DYNSIM_CLI_CLI_H_

#include <ostream>

namespace dynsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitNumerical = 4;

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace dynsim

#endif  // DYNSIM_CLI_CLI_H_
