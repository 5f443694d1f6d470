/* Copyright 2026 The CACP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CACP_TOOLS_CLI_HPP_
#define CACP_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace cacp::cli {

// Exit codes of the `cacp` tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitDiverged = 4;
inline constexpr int kExitCorruptPolicy = 5;

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
/// Data goes to `out`, diagnostics to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cacp::cli

#endif  // CACP_TOOLS_CLI_HPP_
