// Copyright 2026 The nbprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NBPRUNE_TOOLS_COMMANDS_HPP_
#define NBPRUNE_TOOLS_COMMANDS_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace nbprune::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitArgument = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitGuard = 4;

inline constexpr const char* kToolVersion = "0.1.0";

// Runs the tool on `args` (program name excluded). Errors are reported on
// `err` as a single line starting with E_ARG, E_FORMAT or E_GUARD.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nbprune::cli

#endif  // NBPRUNE_TOOLS_COMMANDS_HPP_
