// Copyright 2026 The nmrqcels Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nmrqcels/config.hpp"

namespace nmrqcels {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitOptimizer = 4 };

/// Each command writes its artifacts into `out_dir` and returns an exit code.
int cmd_simulate(const RunConfig &cfg, const std::filesystem::path &out_dir, std::ostream &log);
int cmd_estimate(const RunConfig &cfg, const std::filesystem::path &out_dir, std::ostream &log);
int cmd_trotter_study(const RunConfig &cfg, const std::filesystem::path &out_dir,
                      std::ostream &log);
int cmd_spectrum(const RunConfig &cfg, const std::filesystem::path &out_dir, std::ostream &log,
                 const std::optional<std::filesystem::path> &peaks_csv = std::nullopt);

/// Parses argv, dispatches, and maps exceptions onto exit codes.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace nmrqcels
