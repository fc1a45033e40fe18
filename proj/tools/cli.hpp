// Copyright 2026 The treeshred Authors
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

#ifndef TREESHRED_TOOLS_CLI_HPP_
#define TREESHRED_TOOLS_CLI_HPP_

#include <ostream>

namespace treeshred::cli {

enum ExitCode : int {
  kOk = 0,
  kNoProgram = 1,     // synthesis found nothing, or a migrated table failed
  kInvalidInput = 2,  // bad flags, unreadable or malformed inputs
  kInternal = 3,      // output could not be written, unexpected errors
};

// Entry point of the treeshred command; `out` receives reports and, when no
// output path is given, the program text.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace treeshred::cli

#endif  // TREESHRED_TOOLS_CLI_HPP_
