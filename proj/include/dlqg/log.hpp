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

#pragma once

#include <string_view>

namespace dlqg {

/// Sets the library log level: "error", "warn", "info" or "debug".
/// Unknown names fall back to "warn". Logs go to stderr.
void set_log_level(std::string_view level);

/// Reads DLQG_LOG from the environment and applies it when present.
void configure_logging_from_env();

}  // namespace dlqg
