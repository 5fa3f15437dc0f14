// Copyright 2026 The FoveaParse Authors.
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

#ifndef FOVEA_TOOLS_CLI_HPP_
#define FOVEA_TOOLS_CLI_HPP_

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "config.hpp"

namespace fovea::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Parses argv, runs one subcommand and maps failures to exit codes.
int dispatch(int argc, const char* const* argv);

struct PipelineReport {
  nlohmann::json summary;              // deterministic
  std::map<std::string, double> timings;  // seconds per stage
};

/// synth -> heatmap-gt -> fovea -> parse -> crf -> eval, all under out_dir.
PipelineReport run_full_pipeline(const RunConfig& cfg,
                                 const std::filesystem::path& out_dir,
                                 bool emit_plots);

}  // namespace fovea::cli

#endif  // FOVEA_TOOLS_CLI_HPP_
