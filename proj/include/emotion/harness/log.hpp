// Copyright 2026 The E-Motion Authors
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

#ifndef EMOTION_HARNESS_LOG_HPP_
#define EMOTION_HARNESS_LOG_HPP_

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "emotion/core/error.hpp"

namespace emotion {

inline constexpr const char* kLogEnv = "E_MOTION_LOG";

// Sends log output to stderr at the level named by E_MOTION_LOG
// (trace, debug, info, warn, error, critical, off; default info).
inline void configure_logging() {
  auto logger = spdlog::stderr_color_mt("emotion");
  logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv(kLogEnv); env != nullptr && *env != '\0') {
    level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      throw ValidationError(kLogEnv, std::string("unknown log level \"") + env + "\"");
    }
  }
  spdlog::set_level(level);
}

}  // namespace emotion

#endif  // EMOTION_HARNESS_LOG_HPP_
