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

#include "fovea/foveaparse.hpp"

#include <future>
#include <string>

namespace fovea {
namespace {

std::string size_str(int w, int h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

void check_rect(const FoveaRect& rect, int width, int height) {
  if (rect.width <= 0 || rect.height <= 0 || rect.x0 < 0 || rect.y0 < 0 ||
      rect.x0 + rect.width > width || rect.y0 + rect.height > height) {
    throw DataError(ErrorCode::kOutOfRange,
                    "fovea rect " + size_str(rect.width, rect.height) + "+" +
                        std::to_string(rect.x0) + "+" +
                        std::to_string(rect.y0) + " outside image " +
                        size_str(width, height));
  }
}

void check_output(const ScoreMap& scores, const RgbImage& input,
                  const char* branch) {
  if (!scores.same_size(input)) {
    throw DataError(ErrorCode::kClassifier,
                    std::string(branch) + " classifier returned " +
                        size_str(scores.width(), scores.height()) +
                        " scores for a " +
                        size_str(input.width(), input.height()) + " input");
  }
}

template <typename GridT>
GridT crop_and_upscale_impl(const GridT& src, const FoveaRect& rect,
                            int factor, Resample resample) {
  check_rect(rect, src.width(), src.height());
  if (factor < 1) {
    throw DataError(ErrorCode::kInvalidArgument, "upscale factor must be >= 1");
  }
  GridT cropped = crop(src, rect.x0, rect.y0, rect.width, rect.height);
  if (factor == 1) return cropped;
  return resize(cropped, rect.width * factor, rect.height * factor, resample);
}

}  // namespace

void FusionConfig::validate() const {
  if (upscale_factor < 1) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "fusion: upscale_factor must be >= 1");
  }
}

FileBackedClassifier::FileBackedClassifier(ScoreMap coarse, ScoreMap fovea)
    : coarse_(std::move(coarse)), fovea_(std::move(fovea)) {
  if (coarse_.num_labels() != fovea_.num_labels()) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "coarse and fovea score maps have different label counts");
  }
}

ScoreMap FileBackedClassifier::classify(const RgbImage& image,
                                        const BranchView& view) {
  const ScoreMap& out = view.branch == Branch::kCoarse ? coarse_ : fovea_;
  if (!out.same_size(image)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    std::string(view.branch == Branch::kCoarse ? "coarse"
                                                               : "fovea") +
                        " score file is " + size_str(out.width(), out.height()) +
                        " but the branch input is " +
                        size_str(image.width(), image.height()));
  }
  return out;
}

RgbImage crop_and_upscale(const RgbImage& image, const FoveaRect& rect,
                          int factor, Resample resample) {
  return crop_and_upscale_impl(image, rect, factor, resample);
}

ScoreMap crop_and_upscale(const ScoreMap& scores, const FoveaRect& rect,
                          int factor, Resample resample) {
  return crop_and_upscale_impl(scores, rect, factor, resample);
}

ScoreMap downscale_scores(const ScoreMap& scores, int factor,
                          Resample resample) {
  if (factor < 1) {
    throw DataError(ErrorCode::kInvalidArgument, "downscale factor must be >= 1");
  }
  if (factor == 1) return scores;
  if (resample == Resample::kBilinear) {
    const int w = std::max(1, scores.width() / factor);
    const int h = std::max(1, scores.height() / factor);
    return resize_bilinear(scores, w, h);
  }
  if (scores.width() % factor != 0 || scores.height() % factor != 0) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "nearest downscale: " +
                        size_str(scores.width(), scores.height()) +
                        " is not divisible by " + std::to_string(factor));
  }
  ScoreMap out(scores.width() / factor, scores.height() / factor,
               scores.num_labels());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      auto s = scores.pixel(x * factor, y * factor);
      std::copy(s.begin(), s.end(), out.pixel(x, y).begin());
    }
  }
  return out;
}

ScoreMap fuse(const ScoreMap& coarse, const ScoreMap& fovea_scores,
              const FoveaRect& rect, const FusionConfig& cfg) {
  cfg.validate();
  check_rect(rect, coarse.width(), coarse.height());
  const int f = cfg.upscale_factor;
  if (fovea_scores.width() != rect.width * f ||
      fovea_scores.height() != rect.height * f) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "fovea scores are " +
                        size_str(fovea_scores.width(), fovea_scores.height()) +
                        ", expected " + size_str(rect.width * f, rect.height * f));
  }
  if (fovea_scores.num_labels() != coarse.num_labels()) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "fovea and coarse label counts differ");
  }
  ScoreMap local = downscale_scores(fovea_scores, f, cfg.resample);
  ScoreMap out = coarse;
  for (int y = 0; y < rect.height; ++y) {
    for (int x = 0; x < rect.width; ++x) {
      auto dst = out.pixel(rect.x0 + x, rect.y0 + y);
      auto src = local.pixel(x, y);
      for (std::size_t l = 0; l < dst.size(); ++l) {
        dst[l] = cfg.mode == FusionMode::kReplace
                     ? src[l]
                     : static_cast<float>(
                           0.5 * (static_cast<double>(dst[l]) + src[l]));
      }
    }
  }
  return out;
}

ParseResult run_pipeline(const RgbImage& image, PixelClassifier& classifier,
                         const PerspectiveHeatmap& heatmap,
                         const PipelineConfig& cfg) {
  cfg.fusion.validate();
  if (!heatmap.same_size(image)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "heatmap " + size_str(heatmap.width(), heatmap.height()) +
                        " does not match image " +
                        size_str(image.width(), image.height()));
  }
  const FoveaRect rect = locate_fovea(heatmap, cfg.fovea);
  const int f = cfg.fusion.upscale_factor;
  const RgbImage fovea_input =
      crop_and_upscale(image, rect, f, cfg.fusion.image_resample);
  const BranchView coarse_view{Branch::kCoarse,
                               FoveaRect{0, 0, image.width(), image.height(), 0.0},
                               1};
  const BranchView fovea_view{Branch::kFovea, rect, f};

  ScoreMap coarse;
  ScoreMap fovea_scores;
  if (classifier.concurrent_safe()) {
    auto pending = std::async(std::launch::async, [&] {
      return classifier.classify(fovea_input, fovea_view);
    });
    coarse = classifier.classify(image, coarse_view);
    fovea_scores = pending.get();
  } else {
    coarse = classifier.classify(image, coarse_view);
    fovea_scores = classifier.classify(fovea_input, fovea_view);
  }
  check_output(coarse, image, "coarse");
  check_output(fovea_scores, fovea_input, "fovea");
  ScoreMap fused = fuse(coarse, fovea_scores, rect, cfg.fusion);
  return {std::move(fused), std::move(coarse), rect};
}

LabelMap argmax_labels(const ScoreMap& scores) {
  LabelMap out(scores.width(), scores.height());
  for (std::size_t i = 0; i < scores.pixel_count(); ++i) {
    auto s = scores.pixel(i);
    std::size_t best = 0;
    for (std::size_t l = 1; l < s.size(); ++l) {
      if (s[l] > s[best]) best = l;
    }
    out.values()[i] = static_cast<std::uint16_t>(best);
  }
  return out;
}

FusionMode parse_fusion_mode(std::string_view name) {
  if (name == "replace") return FusionMode::kReplace;
  if (name == "average") return FusionMode::kAverage;
  throw DataError(ErrorCode::kInvalidArgument,
                  "unknown fusion mode '" + std::string(name) + "'");
}

Resample parse_resample(std::string_view name) {
  if (name == "nearest") return Resample::kNearest;
  if (name == "bilinear") return Resample::kBilinear;
  throw DataError(ErrorCode::kInvalidArgument,
                  "unknown resample mode '" + std::string(name) + "'");
}

std::string_view to_string(FusionMode mode) {
  return mode == FusionMode::kReplace ? "replace" : "average";
}

std::string_view to_string(Resample mode) {
  return mode == Resample::kNearest ? "nearest" : "bilinear";
}

}  // namespace fovea
