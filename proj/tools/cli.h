// Copyright (c) 2026 The vemb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VEMB_TOOLS_CLI_H_
#define VEMB_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace vemb::cli {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumericFailure = 4 };

// Runs one "vemb <command> ..." invocation. args excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vemb::cli

#endif  // VEMB_TOOLS_CLI_H_
