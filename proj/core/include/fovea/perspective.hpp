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

// Perspective heatmap ground truth and fovea localization.
//
// For an instance m of class c covering pixel i the per-image score is
//   H(i) = avg_size(c) / area(m),
// so small instances of a class light up. The dataset prior G is the
// per-pixel mean of all H maps at a canonical resolution, and the regression
// target is V = H + delta * G.

#ifndef FOVEA_PERSPECTIVE_HPP_
#define FOVEA_PERSPECTIVE_HPP_

#include <span>

#include "fovea/types.hpp"

namespace fovea {

struct HeatmapGtConfig {
  double delta = 1.0;
  /// Value of pixels outside every instance, before adding delta * G.
  double background_value = 0.0;

  void validate() const;
};

struct FoveaRect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
  double mean_score = 0.0;

  bool contains(int x, int y) const {
    return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height;
  }
  friend bool operator==(const FoveaRect&, const FoveaRect&) = default;
};

struct FoveaConfig {
  double win_frac_w = 0.5;
  double win_frac_h = 0.5;
  int stride = 4;
};

/// Mean instance area per class over a dataset. Classes without any
/// instance keep their previous avg_size. Zero-area (fully occluded)
/// instances do not count.
ClassTable compute_average_sizes(std::span<const InstanceSet> dataset,
                                 const ClassTable& table);

PerspectiveHeatmap heatmap_h(const InstanceSet& instances,
                             const ClassTable& table,
                             const HeatmapGtConfig& cfg);

/// Bilinearly resamples each map to the output size, then averages.
PerspectiveHeatmap global_prior(std::span<const PerspectiveHeatmap> heatmaps,
                                int out_width, int out_height);

PerspectiveHeatmap heatmap_v(const PerspectiveHeatmap& h,
                             const PerspectiveHeatmap& g, double delta);

/// Mean over pixels of 0.5 x^2 (|x| < 1) or |x| - 0.5, x = pred - gt.
double smoothed_l1(const PerspectiveHeatmap& pred,
                   const PerspectiveHeatmap& gt);

/// Slides a round(frac * dim) window with the given stride (the last row and
/// column of positions are always visited) and returns the window with the
/// largest mean. Ties go to the smallest y0, then the smallest x0.
FoveaRect locate_fovea(const PerspectiveHeatmap& heatmap, double win_frac_w,
                       double win_frac_h, int stride);

inline FoveaRect locate_fovea(const PerspectiveHeatmap& heatmap,
                              const FoveaConfig& cfg) {
  return locate_fovea(heatmap, cfg.win_frac_w, cfg.win_frac_h, cfg.stride);
}

}  // namespace fovea

#endif  // FOVEA_PERSPECTIVE_HPP_
