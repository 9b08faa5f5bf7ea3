/*
 Copyright 2026 The dlqg Authors

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

// Subcommand front end: validate, check-nestedness, solve-dual, synthesize,
// simulate, oracle-compare.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dlqg::cli {

enum ExitCode : int {
    kSuccess = 0,
    kValidationFailure = 1,
    kSolverFailure = 2,
    kInputError = 3,
};

std::string version();

/// Runs one command line (without the program name). Results go to out,
/// diagnostics and usage errors to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dlqg::cli
