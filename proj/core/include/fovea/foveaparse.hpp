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

// Two-branch scale-normalized parsing. The coarse branch classifies the
// full image; the fovea branch classifies the fovea crop upscaled by an
// integer factor. Fovea scores are brought back to crop resolution and
// merged into the coarse scores inside the fovea rectangle only.

#ifndef FOVEA_FOVEAPARSE_HPP_
#define FOVEA_FOVEAPARSE_HPP_

#include <string_view>

#include "fovea/perspective.hpp"
#include "fovea/resample.hpp"
#include "fovea/types.hpp"

namespace fovea {

enum class FusionMode { kReplace, kAverage };

struct FusionConfig {
  FusionMode mode = FusionMode::kReplace;
  int upscale_factor = 2;
  /// Resampling of score maps.
  Resample resample = Resample::kNearest;
  /// Resampling of the image crop fed to the fovea branch.
  Resample image_resample = Resample::kBilinear;

  void validate() const;
};

struct PipelineConfig {
  FoveaConfig fovea;
  FusionConfig fusion;
};

enum class Branch { kCoarse, kFovea };

/// Where a classifier input came from: the source-image rectangle it covers
/// and the integer upscale applied to it.
struct BranchView {
  Branch branch = Branch::kCoarse;
  FoveaRect source;
  int scale = 1;
};

/// Pixel classifier contract: returns a score map with the input's spatial
/// size and a fixed label count.
class PixelClassifier {
 public:
  virtual ~PixelClassifier() = default;
  virtual ScoreMap classify(const RgbImage& image, const BranchView& view) = 0;
  /// Whether two calls may run at the same time.
  virtual bool concurrent_safe() const { return false; }
};

/// Serves precomputed coarse and fovea score maps.
class FileBackedClassifier final : public PixelClassifier {
 public:
  FileBackedClassifier(ScoreMap coarse, ScoreMap fovea);
  ScoreMap classify(const RgbImage& image, const BranchView& view) override;
  bool concurrent_safe() const override { return true; }

 private:
  ScoreMap coarse_;
  ScoreMap fovea_;
};

RgbImage crop_and_upscale(const RgbImage& image, const FoveaRect& rect,
                          int factor, Resample resample);
ScoreMap crop_and_upscale(const ScoreMap& scores, const FoveaRect& rect,
                          int factor, Resample resample);

/// Nearest keeps the top-left sample of each factor x factor block (the
/// dimensions must divide); bilinear uses half-pixel-center weights.
ScoreMap downscale_scores(const ScoreMap& scores, int factor,
                          Resample resample);

ScoreMap fuse(const ScoreMap& coarse, const ScoreMap& fovea_scores,
              const FoveaRect& rect, const FusionConfig& cfg);

struct ParseResult {
  ScoreMap fused;
  ScoreMap coarse;
  FoveaRect rect;
};

/// Locates the fovea on the heatmap, runs the classifier exactly twice and
/// fuses the results. Classifier failures propagate; nothing is returned.
ParseResult run_pipeline(const RgbImage& image, PixelClassifier& classifier,
                         const PerspectiveHeatmap& heatmap,
                         const PipelineConfig& cfg);

/// Per-pixel argmax; ties resolve to the lowest label.
LabelMap argmax_labels(const ScoreMap& scores);

FusionMode parse_fusion_mode(std::string_view name);
Resample parse_resample(std::string_view name);
std::string_view to_string(FusionMode mode);
std::string_view to_string(Resample mode);

}  // namespace fovea

#endif  // FOVEA_FOVEAPARSE_HPP_
