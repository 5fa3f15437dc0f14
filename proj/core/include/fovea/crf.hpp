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

// Perspective-aware fully connected CRF.
//
//   E(l) = sum_i psi_u(i, l_i)
//        + sum_{i<j} mu(p_i, p_j) [l_i != l_j] kappa(f_i, f_j)
//
// kappa is the two-kernel bilateral + spatial Gaussian potential over
// position and RGB color. mu couples two pixels only through the
// highest-scoring detection box B containing both:
//
//   mu = clamp(d_B * mean(V) / max(mean_B(V), epsilon_mean), 0, mu_max)
//
// where V is the perspective heatmap; pairs outside every common box get
// mu_fallback. Large near objects (low heatmap inside their box) are
// smoothed hard; small distant ones barely at all.

#ifndef FOVEA_CRF_HPP_
#define FOVEA_CRF_HPP_

#include <functional>
#include <span>
#include <vector>

#include "fovea/metrics.hpp"
#include "fovea/types.hpp"

namespace fovea {

struct CrfParams {
  double w1 = 0.05;           // appearance kernel weight
  double w2 = 0.05;           // smoothness kernel weight
  double theta_alpha = 20.0;  // appearance kernel, spatial bandwidth
  double theta_beta = 20.0;   // appearance kernel, color bandwidth
  double theta_gamma = 3.0;   // smoothness kernel, spatial bandwidth
  int iterations = 10;
  double mu_fallback = 0.0;
  double mu_max = 1e4;
  double epsilon_mean = 1e-6;

  void validate() const;
  friend bool operator==(const CrfParams&, const CrfParams&) = default;
};

struct PixelPoint {
  int x = 0;
  int y = 0;
};

struct PixelFeature {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

std::vector<PixelFeature> pixel_features(const RgbImage& image);

/// Mean-field distributions; each pixel's label vector sums to one.
class Marginals : public Grid<double> {
 public:
  Marginals() = default;
  Marginals(int width, int height, int num_labels)
      : Grid(width, height, num_labels) {}
  int num_labels() const { return channels(); }
  /// Per-pixel argmax; ties resolve to the lowest label.
  LabelMap argmax() const;
};

/// psi_u(i, l) = -log softmax(scores_i)[l].
ScoreMap unary_from_scores(const ScoreMap& scores);

double kappa(const PixelFeature& fi, const PixelFeature& fj,
             const CrfParams& params);

/// Direct evaluation for one pixel pair. Box containment is half-open.
double mu(PixelPoint pi, PixelPoint pj, std::span<const DetectionBox> boxes,
          const PerspectiveHeatmap& heatmap, const CrfParams& params);

/// Pixel-pair compatibility mu precomputed for one image: per-box factors
/// and, per pixel, the boxes containing it ordered best first.
class SpatialSupport {
 public:
  SpatialSupport(std::span<const DetectionBox> boxes,
                 const PerspectiveHeatmap& heatmap, const CrfParams& params);

  double operator()(std::size_t i, std::size_t j) const;

  /// Calls f(j, mu_ij) for every j != i whose mu may be non-zero. With a
  /// zero fallback only pixels sharing a box with i are visited.
  template <typename F>
  void for_each_partner(std::size_t i, F&& f) const;

  int width() const { return width_; }
  int height() const { return height_; }
  double box_factor(std::size_t box) const { return factor_[box]; }

 private:
  std::span<const int> boxes_of(std::size_t i) const {
    return {ranks_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  int width_;
  int height_;
  double fallback_;
  std::vector<DetectionBox> sorted_;  // best first
  std::vector<double> factor_;        // mu per sorted box
  std::vector<std::size_t> offsets_;
  std::vector<int> ranks_;
};

template <typename F>
void SpatialSupport::for_each_partner(std::size_t i, F&& f) const {
  const auto mine = boxes_of(i);
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  if (fallback_ != 0.0) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) f(j, (*this)(i, j));
    }
    return;
  }
  for (std::size_t k = 0; k < mine.size(); ++k) {
    const DetectionBox& box = sorted_[static_cast<std::size_t>(mine[k])];
    const double m = factor_[static_cast<std::size_t>(mine[k])];
    for (int y = box.y0; y < box.y1; ++y) {
      for (int x = box.x0; x < box.x1; ++x) {
        const std::size_t j = static_cast<std::size_t>(y) * width_ + x;
        if (j == i) continue;
        // j belongs to the first (best) box of i that contains it.
        bool seen = false;
        for (std::size_t e = 0; e < k && !seen; ++e) {
          seen = sorted_[static_cast<std::size_t>(mine[e])].contains(x, y);
        }
        if (!seen) f(j, m);
      }
    }
  }
}

/// Pixels labeled ignore are left out of both sums.
double energy(const LabelMap& labels, const ScoreMap& unary,
              std::span<const PixelFeature> features,
              std::span<const DetectionBox> boxes,
              const PerspectiveHeatmap& heatmap, const CrfParams& params);

struct MeanFieldOptions {
  int threads = 1;
  /// Called after each iteration with its 1-based index.
  std::function<void(int, const Marginals&)> observer;
};

/// Parallel (Jacobi) updates from Q = softmax(-psi_u):
///   m_i(l) = sum_{j != i} mu_ij kappa_ij Q_j(l)
///   Q_i(l) ∝ exp(-psi_u(i, l) - (sum_l' m_i(l') - m_i(l)))
Marginals mean_field(const ScoreMap& unary,
                     std::span<const PixelFeature> features,
                     std::span<const DetectionBox> boxes,
                     const PerspectiveHeatmap& heatmap,
                     const CrfParams& params,
                     const MeanFieldOptions& options = {});

struct MapResult {
  LabelMap labels;
  double energy = 0.0;
};

/// Exhaustive minimum-energy labeling. Requires at most max_pixels pixels
/// and labels^pixels <= 5e7.
MapResult exact_map(const ScoreMap& unary,
                    std::span<const PixelFeature> features,
                    std::span<const DetectionBox> boxes,
                    const PerspectiveHeatmap& heatmap, const CrfParams& params,
                    int max_pixels = 16);

/// unary_from_scores -> mean_field -> argmax.
LabelMap refine(const ScoreMap& scores, const RgbImage& image,
                std::span<const DetectionBox> boxes,
                const PerspectiveHeatmap& heatmap, const CrfParams& params,
                const MeanFieldOptions& options = {});

struct ValidationItem {
  ScoreMap scores;
  RgbImage image;
  std::vector<DetectionBox> boxes;
  PerspectiveHeatmap heatmap;
  LabelMap gt;
};

struct GridSearchRow {
  CrfParams params;
  double mean_iou = 0.0;
};

struct GridSearchResult {
  CrfParams best;
  std::size_t best_index = 0;
  std::vector<GridSearchRow> table;
};

/// Picks the grid point with the highest dataset-level mean class IoU;
/// the first point wins ties.
GridSearchResult grid_search(std::span<const CrfParams> grid,
                             std::span<const ValidationItem> validation,
                             const ClassTable& table, int threads = 1);

}  // namespace fovea

#endif  // FOVEA_CRF_HPP_
