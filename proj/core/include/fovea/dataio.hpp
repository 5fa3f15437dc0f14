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

// On-disk formats:
//   label maps  binary PGM "P5", maxval 65535, big-endian samples;
//               65535 is the ignore label
//   images      binary PPM "P6", maxval 255
//   tensors     FVT1: "FVT1", u32 rank, rank x u32 dims (height, width
//               [, labels]), then f32 values row-major; all little-endian
//   JSON        class tables, polygon annotations, detection boxes
//
// All readers throw DataError with a code that identifies the failure.

#ifndef FOVEA_DATAIO_HPP_
#define FOVEA_DATAIO_HPP_

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "fovea/types.hpp"

namespace fovea {

LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const LabelMap& map, const std::filesystem::path& path);

RgbImage read_image(const std::filesystem::path& path);
void write_image(const RgbImage& image, const std::filesystem::path& path);

using Tensor = std::variant<PerspectiveHeatmap, ScoreMap>;

/// Rank 2 yields a heatmap, rank 3 a score map.
Tensor read_tensor(const std::filesystem::path& path);
PerspectiveHeatmap read_heatmap(const std::filesystem::path& path);
ScoreMap read_scores(const std::filesystem::path& path);
void write_tensor(const PerspectiveHeatmap& heatmap,
                  const std::filesystem::path& path);
void write_tensor(const ScoreMap& scores, const std::filesystem::path& path);

ClassTable read_class_table(const std::filesystem::path& path);
void write_class_table(const ClassTable& table,
                       const std::filesystem::path& path);

/// Even-odd scanline fill sampled at pixel centers, clipped to the image.
std::vector<PixelRun> rasterize_polygon(
    const std::vector<std::pair<double, double>>& polygon, int width,
    int height);

/// Rasterizes polygons in file order; later objects overwrite earlier ones.
/// Polygons entirely outside the image are skipped with a warning.
InstanceSet ingest_polygon_annotations(const std::filesystem::path& path,
                                       const ClassTable& table, int width,
                                       int height,
                                       std::vector<std::string>* warnings =
                                           nullptr);

struct AnnotationObject {
  std::string label;
  std::vector<std::pair<double, double>> polygon;
};

void write_polygon_annotations(const std::vector<AnnotationObject>& objects,
                               int width, int height,
                               const std::filesystem::path& path);

/// Boxes are clamped to the image; boxes left empty by clamping are dropped
/// with a warning.
std::vector<DetectionBox> read_boxes(const std::filesystem::path& path,
                                     int width, int height,
                                     std::vector<std::string>* warnings =
                                         nullptr);
void write_boxes(const std::vector<DetectionBox>& boxes,
                 const std::filesystem::path& path);

/// Checks every label is ignore or a table class.
void validate_labels(const LabelMap& map, const ClassTable& table);

/// Throws kIo on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace fovea

#endif  // FOVEA_DATAIO_HPP_
