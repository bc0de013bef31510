// Copyright 2026 The covplan Authors.
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
#ifndef COVPLAN_TOOLS_CLI_HPP_
#define COVPLAN_TOOLS_CLI_HPP_

#include <ostream>

namespace covplan::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kAssertionFailed = 3;

// Entry point behind the covplan executable. Errors are reported on `err` as
// a single "error: code=<usage|runtime|assertion> message=<text>" line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace covplan::cli

#endif  // COVPLAN_TOOLS_CLI_HPP_
