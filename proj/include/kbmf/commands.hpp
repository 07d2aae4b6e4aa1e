/*
 * Copyright 2026 The kbmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command implementations behind the kbmf executable. Each command reads a
// RunConfig, computes everything in memory, and only then writes its
// artifacts (atomically) under the output directory.

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string_view>

#include "kbmf/config.hpp"

namespace kbmf {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumerical = 4,
};

/// 2 for configuration and parameter errors, 3 for data and shape errors,
/// 4 for numerical failures, 1 for anything else.
int exit_code_for(const std::exception& err);

/// Iteration budget of the toy command unless [model] max_iter is given.
inline constexpr int kToyMaxIter = 1000;

void cmd_toy(const RunConfig& cfg, std::ostream& out);
void cmd_fit(const RunConfig& cfg, std::ostream& out);
void cmd_predict(const RunConfig& cfg, std::ostream& out);
void cmd_cv(const RunConfig& cfg, std::ostream& out);
void cmd_eval(const RunConfig& cfg, std::ostream& out);

struct CommandRequest {
  std::string command;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
};

/// Loads the config, applies overrides, runs the command and maps errors
/// onto exit codes. Errors are written to `err` as one JSON object.
int run_command(const CommandRequest& request, std::ostream& out, std::ostream& err);

/// Loads a target matrix, mapping 0/1 entries to -1/+1 when requested.
Matrix load_targets(const std::filesystem::path& path, bool labels_01);

}  // namespace kbmf
