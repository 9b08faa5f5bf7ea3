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

#include "logging.hpp"

#include "dlqg/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string>

namespace dlqg {

namespace detail {

spdlog::logger& logger() {
    static const std::shared_ptr<spdlog::logger> instance = [] {
        auto existing = spdlog::get("dlqg");
        if (existing) {
            return existing;
        }
        auto created = spdlog::stderr_color_mt("dlqg");
        created->set_level(spdlog::level::warn);
        created->set_pattern("[%l] %v");
        return created;
    }();
    return *instance;
}

}  // namespace detail

void set_log_level(std::string_view level) {
    auto parsed = spdlog::level::warn;
    if (level == "error") {
        parsed = spdlog::level::err;
    } else if (level == "info") {
        parsed = spdlog::level::info;
    } else if (level == "debug") {
        parsed = spdlog::level::debug;
    }
    detail::logger().set_level(parsed);
}

void configure_logging_from_env() {
    if (const char* value = std::getenv("DLQG_LOG")) {
        set_log_level(value);
    }
}

}  // namespace dlqg
