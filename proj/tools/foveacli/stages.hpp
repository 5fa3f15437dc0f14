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

// Stage runners shared by the subcommands and the end-to-end pipeline.
// Each one reads its inputs from disk and writes only below its output
// directory.

#ifndef FOVEA_TOOLS_STAGES_HPP_
#define FOVEA_TOOLS_STAGES_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "fovea/crf.hpp"
#include "fovea/metrics.hpp"
#include "fovea/perspective.hpp"
#include "fovea/types.hpp"

namespace fovea::cli {

namespace fs = std::filesystem;

/// Throws DataError(kIo) naming the flag and path when the file is missing.
void require_file(const fs::path& path, const std::string& what);
void require_dir(const fs::path& path, const std::string& what);

struct DatasetEntry {
  std::string name;
  fs::path image;
  fs::path gt;
  fs::path annotations;
  fs::path boxes;
};

struct Dataset {
  fs::path classes;
  int width = 0;
  int height = 0;
  std::vector<DatasetEntry> scenes;
};

/// Random stream ids for derive_seed.
inline constexpr std::uint64_t kSceneStream = 1;
inline constexpr std::uint64_t kOracleStream = 2;

Dataset write_synthetic_dataset(const RunConfig& cfg, const fs::path& out_dir);
/// Paths in the manifest are resolved against its directory.
Dataset read_dataset(const fs::path& manifest);

struct HeatmapGtResult {
  ClassTable table;  // with average sizes
  PerspectiveHeatmap prior;
  std::vector<InstanceSet> instances;
  std::vector<PerspectiveHeatmap> h;
  std::vector<PerspectiveHeatmap> v;
  fs::path classes_path;
  std::vector<fs::path> v_paths;
};

HeatmapGtResult run_heatmap_gt(const Dataset& dataset, const RunConfig& cfg,
                               const fs::path& out_dir);

nlohmann::json to_json(const FoveaRect& rect);

struct CrfOutput {
  LabelMap labels;
  std::vector<double> energy_trace;  // index 0 is the unary-only start
};

/// Mean-field refinement; records the energy of the argmax labeling after
/// every iteration when `trace` is set.
CrfOutput run_crf(const ScoreMap& scores, const RgbImage& image,
                  const std::vector<DetectionBox>& boxes,
                  const PerspectiveHeatmap& heatmap, const CrfParams& params,
                  int threads, bool trace);

std::string energy_trace_csv(const std::vector<double>& trace);

/// Means and per-entry values for one accumulator.
nlohmann::json metrics_json(const ConfusionAccumulator& acc);
/// class,IoU,iIoU rows followed by category rows.
std::string metrics_csv(const ConfusionAccumulator& acc);

/// Fixed-precision formatting so text outputs are stable.
std::string format_number(double v);

}  // namespace fovea::cli

#endif  // FOVEA_TOOLS_STAGES_HPP_
