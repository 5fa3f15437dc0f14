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

#ifndef FOVEA_TOOLS_CONFIG_HPP_
#define FOVEA_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fovea/crf.hpp"
#include "fovea/foveaparse.hpp"
#include "fovea/metrics.hpp"
#include "fovea/perspective.hpp"
#include "fovea/synth.hpp"

namespace fovea::cli {

struct MetricOptions {
  RegionKind region = RegionKind::kFull;
  double central_frac = 0.5;
};

/// Everything a run needs. Loaded from a JSON config, then overridden by
/// command-line flags.
struct RunConfig {
  std::uint64_t seed = 0;
  int num_scenes = 10;
  int threads = 1;
  SceneSpec scene = SceneSpec::defaults();
  HeatmapGtConfig heatmap;
  FoveaConfig fovea;
  FusionConfig fusion;
  OracleConfig oracle;
  CrfParams crf;
  MetricOptions metrics;

  void validate() const;
};

/// Rejects unknown keys at every level.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

CrfParams parse_crf_params(const nlohmann::json& j, CrfParams base = {});
nlohmann::json to_json(const CrfParams& p);

/// Either {"points": [{...}, ...]} or a cartesian product
/// {"w1": [..], "theta_alpha": [..], ...} expanded with the last listed
/// parameter varying fastest in the fixed field order of CrfParams.
std::vector<CrfParams> expand_param_grid(const nlohmann::json& j,
                                         const CrfParams& base);

nlohmann::json read_json(const std::filesystem::path& path);

/// Per-scene seeds derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t index);

}  // namespace fovea::cli

#endif  // FOVEA_TOOLS_CONFIG_HPP_
