// Copyright 2026 The partgraph Authors. All Rights Reserved.
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

// Command-line front end. Every subcommand reads its inputs from files,
// writes its primary result to --out (or stdout) and reports diagnostics on
// the error stream.

#ifndef PARTGRAPH_TOOLS_CLI_H_
#define PARTGRAPH_TOOLS_CLI_H_

#include <ostream>

namespace partgraph::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace partgraph::cli

#endif  // PARTGRAPH_TOOLS_CLI_H_
