/*
 Copyright 2026 The delayq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DELAYQ_CLI_HPP
#define DELAYQ_CLI_HPP

#include <ostream>

namespace delayq {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kInadmissible = 2,
  kHorizon = 3,
  kNoConvergence = 4,
  kAblationFalsified = 5,
  kPropertyFailed = 6,
};

/// delayq simulate|evaluate|synthesize|ablate --config PATH [--out DIR]
///        [--seed INT] [--threads INT]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace delayq

#endif  // DELAYQ_CLI_HPP
