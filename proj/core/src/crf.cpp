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

#include "fovea/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace fovea {
namespace {

struct HeatmapSum {
  long double sum = 0.0L;
  std::int64_t count = 0;
};

HeatmapSum sum_all(const PerspectiveHeatmap& heatmap) {
  HeatmapSum s;
  for (float v : heatmap.values()) s.sum += v;
  s.count = static_cast<std::int64_t>(heatmap.values().size());
  return s;
}

HeatmapSum sum_box(const PerspectiveHeatmap& heatmap, const DetectionBox& box) {
  const int x0 = std::clamp(box.x0, 0, heatmap.width());
  const int x1 = std::clamp(box.x1, 0, heatmap.width());
  const int y0 = std::clamp(box.y0, 0, heatmap.height());
  const int y1 = std::clamp(box.y1, 0, heatmap.height());
  HeatmapSum s;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) s.sum += heatmap(x, y);
  }
  s.count = std::max(0, x1 - x0) * static_cast<std::int64_t>(std::max(0, y1 - y0));
  return s;
}

// The mean ratio is formed as (S_all * |B|) / (S_B * |V|) so that scaling
// the heatmap by c scales numerator and denominator alike.
double mu_for_box(double score, const HeatmapSum& all, const HeatmapSum& box,
                  const CrfParams& params) {
  long double ratio;
  if (box.count == 0 ||
      box.sum / static_cast<long double>(box.count) < params.epsilon_mean) {
    ratio = all.sum / static_cast<long double>(all.count) / params.epsilon_mean;
  } else {
    ratio = (all.sum * static_cast<long double>(box.count)) /
            (box.sum * static_cast<long double>(all.count));
  }
  const double mu = static_cast<double>(score * ratio);
  return std::clamp(mu, 0.0, params.mu_max);
}

void check_inputs(const ScoreMap& unary, std::span<const PixelFeature> features,
                  const PerspectiveHeatmap& heatmap) {
  if (!unary.same_size(heatmap)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "crf: unary and heatmap sizes differ");
  }
  if (features.size() != unary.pixel_count()) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "crf: feature count does not match the pixel count");
  }
}

void softmax_negated(std::span<const float> psi, std::span<double> q) {
  double lo = std::numeric_limits<double>::infinity();
  for (float v : psi) lo = std::min(lo, static_cast<double>(v));
  double z = 0.0;
  for (std::size_t l = 0; l < psi.size(); ++l) {
    q[l] = std::exp(-(static_cast<double>(psi[l]) - lo));
    z += q[l];
  }
  for (double& v : q) v /= z;
}

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, n);
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

void CrfParams::validate() const {
  const bool ok = w1 >= 0.0 && w2 >= 0.0 && theta_alpha > 0.0 &&
                  theta_beta > 0.0 && theta_gamma > 0.0 && iterations >= 0 &&
                  mu_fallback >= 0.0 && mu_max > 0.0 && epsilon_mean > 0.0;
  if (!ok) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "crf params: weights and mu_fallback must be >= 0, "
                    "bandwidths, mu_max and epsilon_mean > 0, iterations >= 0");
  }
}

std::vector<PixelFeature> pixel_features(const RgbImage& image) {
  std::vector<PixelFeature> features;
  features.reserve(image.pixel_count());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      auto p = image.pixel(x, y);
      features.push_back({static_cast<double>(x), static_cast<double>(y),
                          static_cast<double>(p[0]), static_cast<double>(p[1]),
                          static_cast<double>(p[2])});
    }
  }
  return features;
}

LabelMap Marginals::argmax() const {
  LabelMap out(width(), height());
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    auto q = pixel(i);
    std::size_t best = 0;
    for (std::size_t l = 1; l < q.size(); ++l) {
      if (q[l] > q[best]) best = l;
    }
    out.values()[i] = static_cast<std::uint16_t>(best);
  }
  return out;
}

ScoreMap unary_from_scores(const ScoreMap& scores) {
  ScoreMap unary(scores.width(), scores.height(), scores.num_labels());
  for (std::size_t i = 0; i < scores.pixel_count(); ++i) {
    auto s = scores.pixel(i);
    double hi = -std::numeric_limits<double>::infinity();
    for (float v : s) hi = std::max(hi, static_cast<double>(v));
    double z = 0.0;
    for (float v : s) z += std::exp(static_cast<double>(v) - hi);
    const double log_z = std::log(z);
    auto u = unary.pixel(i);
    for (std::size_t l = 0; l < s.size(); ++l) {
      u[l] = static_cast<float>(-(static_cast<double>(s[l]) - hi - log_z));
    }
  }
  return unary;
}

double kappa(const PixelFeature& fi, const PixelFeature& fj,
             const CrfParams& params) {
  const double dx = fi.x - fj.x;
  const double dy = fi.y - fj.y;
  const double dr = fi.r - fj.r;
  const double dg = fi.g - fj.g;
  const double db = fi.b - fj.b;
  const double p2 = dx * dx + dy * dy;
  const double c2 = dr * dr + dg * dg + db * db;
  const double ta = params.theta_alpha;
  const double tb = params.theta_beta;
  const double tg = params.theta_gamma;
  return params.w1 * std::exp(-p2 / (2 * ta * ta) - c2 / (2 * tb * tb)) +
         params.w2 * std::exp(-p2 / (2 * tg * tg));
}

double mu(PixelPoint pi, PixelPoint pj, std::span<const DetectionBox> boxes,
          const PerspectiveHeatmap& heatmap, const CrfParams& params) {
  const DetectionBox* best = nullptr;
  for (const DetectionBox& b : boxes) {
    if (b.contains(pi.x, pi.y) && b.contains(pj.x, pj.y) &&
        (best == nullptr || b.score > best->score)) {
      best = &b;
    }
  }
  if (best == nullptr) return params.mu_fallback;
  return mu_for_box(best->score, sum_all(heatmap), sum_box(heatmap, *best),
                    params);
}

SpatialSupport::SpatialSupport(std::span<const DetectionBox> boxes,
                               const PerspectiveHeatmap& heatmap,
                               const CrfParams& params)
    : width_(heatmap.width()),
      height_(heatmap.height()),
      fallback_(params.mu_fallback) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].score > boxes[b].score;
  });
  const HeatmapSum all = sum_all(heatmap);
  for (std::size_t k : order) {
    DetectionBox b = boxes[k];
    b.x0 = std::clamp(b.x0, 0, width_);
    b.x1 = std::clamp(b.x1, 0, width_);
    b.y0 = std::clamp(b.y0, 0, height_);
    b.y1 = std::clamp(b.y1, 0, height_);
    if (b.x1 <= b.x0 || b.y1 <= b.y0) continue;
    sorted_.push_back(b);
    factor_.push_back(mu_for_box(b.score, all, sum_box(heatmap, b), params));
  }
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  std::vector<std::vector<int>> lists(n);
  for (std::size_t r = 0; r < sorted_.size(); ++r) {
    const DetectionBox& b = sorted_[r];
    for (int y = b.y0; y < b.y1; ++y) {
      for (int x = b.x0; x < b.x1; ++x) {
        lists[static_cast<std::size_t>(y) * width_ + x].push_back(
            static_cast<int>(r));
      }
    }
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + lists[i].size();
  ranks_.reserve(offsets_[n]);
  for (const auto& l : lists) ranks_.insert(ranks_.end(), l.begin(), l.end());
}

double SpatialSupport::operator()(std::size_t i, std::size_t j) const {
  const int x = static_cast<int>(j % static_cast<std::size_t>(width_));
  const int y = static_cast<int>(j / static_cast<std::size_t>(width_));
  for (int r : boxes_of(i)) {
    if (sorted_[static_cast<std::size_t>(r)].contains(x, y)) {
      return factor_[static_cast<std::size_t>(r)];
    }
  }
  return fallback_;
}

double energy(const LabelMap& labels, const ScoreMap& unary,
              std::span<const PixelFeature> features,
              std::span<const DetectionBox> boxes,
              const PerspectiveHeatmap& heatmap, const CrfParams& params) {
  params.validate();
  check_inputs(unary, features, heatmap);
  if (!labels.same_size(unary)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "energy: label map and unary sizes differ");
  }
  const SpatialSupport support(boxes, heatmap, params);
  const auto& lab = labels.values();
  double unary_sum = 0.0;
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < lab.size(); ++i) {
    if (lab[i] == kIgnoreLabel) continue;
    if (lab[i] >= unary.num_labels()) {
      throw DataError(ErrorCode::kOutOfRange,
                      "energy: label " + std::to_string(lab[i]) +
                          " exceeds the unary label count");
    }
    unary_sum += unary.pixel(i)[lab[i]];
    support.for_each_partner(i, [&](std::size_t j, double m) {
      if (j <= i || m == 0.0 || lab[j] == kIgnoreLabel || lab[j] == lab[i]) {
        return;
      }
      pair_sum += m * kappa(features[i], features[j], params);
    });
  }
  return unary_sum + pair_sum;
}

Marginals mean_field(const ScoreMap& unary,
                     std::span<const PixelFeature> features,
                     std::span<const DetectionBox> boxes,
                     const PerspectiveHeatmap& heatmap,
                     const CrfParams& params,
                     const MeanFieldOptions& options) {
  params.validate();
  check_inputs(unary, features, heatmap);
  const std::size_t n = unary.pixel_count();
  const auto labels = static_cast<std::size_t>(unary.num_labels());
  Marginals q(unary.width(), unary.height(), unary.num_labels());
  for (std::size_t i = 0; i < n; ++i) softmax_negated(unary.pixel(i), q.pixel(i));
  if (params.iterations == 0) return q;

  const SpatialSupport support(boxes, heatmap, params);
  std::vector<double> message(n * labels);
  Marginals next = q;
  for (int it = 1; it <= params.iterations; ++it) {
    parallel_for(n, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        double* m = message.data() + i * labels;
        std::fill(m, m + labels, 0.0);
        support.for_each_partner(i, [&](std::size_t j, double mu_ij) {
          if (mu_ij == 0.0) return;
          const double w = mu_ij * kappa(features[i], features[j], params);
          const double* qj = q.values().data() + j * labels;
          for (std::size_t l = 0; l < labels; ++l) m[l] += w * qj[l];
        });
        const double total = std::accumulate(m, m + labels, 0.0);
        auto psi = unary.pixel(i);
        auto out = next.pixel(i);
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < labels; ++l) {
          out[l] = static_cast<double>(psi[l]) + (total - m[l]);
          lo = std::min(lo, out[l]);
        }
        double z = 0.0;
        for (std::size_t l = 0; l < labels; ++l) {
          out[l] = std::exp(-(out[l] - lo));
          z += out[l];
        }
        for (std::size_t l = 0; l < labels; ++l) out[l] /= z;
      }
    });
    for (double v : next.values()) {
      if (!std::isfinite(v)) {
        throw DataError(ErrorCode::kNonFinite,
                        "mean_field: non-finite marginal at iteration " +
                            std::to_string(it));
      }
    }
    std::swap(q, next);
    if (options.observer) options.observer(it, q);
  }
  return q;
}

MapResult exact_map(const ScoreMap& unary,
                    std::span<const PixelFeature> features,
                    std::span<const DetectionBox> boxes,
                    const PerspectiveHeatmap& heatmap, const CrfParams& params,
                    int max_pixels) {
  params.validate();
  check_inputs(unary, features, heatmap);
  const std::size_t n = unary.pixel_count();
  const auto labels = static_cast<std::size_t>(unary.num_labels());
  const double states = std::pow(static_cast<double>(labels), static_cast<double>(n));
  if (n > static_cast<std::size_t>(max_pixels) || states > 5e7) {
    throw DataError(ErrorCode::kTooLarge,
                    "exact_map: " + std::to_string(labels) + "^" +
                        std::to_string(n) + " labelings exceed the limit");
  }
  const SpatialSupport support(boxes, heatmap, params);
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      w[i * n + j] = support(i, j) * kappa(features[i], features[j], params);
    }
  }
  auto u = [&](std::size_t i, std::size_t l) {
    return static_cast<double>(unary.pixel(i)[l]);
  };
  // Pairwise terms are non-negative, so the sum of per-pixel unary minima
  // over the unassigned suffix bounds the remaining energy from below.
  std::vector<double> suffix_bound(n + 1, 0.0);
  std::vector<std::uint16_t> best(n, 0);
  for (std::size_t k = n; k-- > 0;) {
    std::size_t arg = 0;
    for (std::size_t l = 1; l < labels; ++l) {
      if (u(k, l) < u(k, arg)) arg = l;
    }
    best[k] = static_cast<std::uint16_t>(arg);
    suffix_bound[k] = suffix_bound[k + 1] + u(k, arg);
  }
  auto total = [&](const std::vector<std::uint16_t>& lab) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e += u(i, lab[i]);
      for (std::size_t j = i + 1; j < n; ++j) {
        if (lab[i] != lab[j]) e += w[i * n + j];
      }
    }
    return e;
  };
  double best_energy = total(best);
  std::vector<std::uint16_t> current(n, 0);
  auto search = [&](auto&& self, std::size_t k, double partial) -> void {
    if (partial + suffix_bound[k] >= best_energy) return;
    if (k == n) {
      best_energy = partial;
      best = current;
      return;
    }
    for (std::size_t l = 0; l < labels; ++l) {
      double cost = u(k, l);
      for (std::size_t j = 0; j < k; ++j) {
        if (current[j] != l) cost += w[j * n + k];
      }
      current[k] = static_cast<std::uint16_t>(l);
      self(self, k + 1, partial + cost);
    }
  };
  search(search, 0, 0.0);

  MapResult result{LabelMap(unary.width(), unary.height()), 0.0};
  std::copy(best.begin(), best.end(), result.labels.values().begin());
  result.energy = energy(result.labels, unary, features, boxes, heatmap, params);
  return result;
}

LabelMap refine(const ScoreMap& scores, const RgbImage& image,
                std::span<const DetectionBox> boxes,
                const PerspectiveHeatmap& heatmap, const CrfParams& params,
                const MeanFieldOptions& options) {
  if (!scores.same_size(image)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "refine: scores and image sizes differ");
  }
  const ScoreMap unary = unary_from_scores(scores);
  const std::vector<PixelFeature> features = pixel_features(image);
  return mean_field(unary, features, boxes, heatmap, params, options).argmax();
}

GridSearchResult grid_search(std::span<const CrfParams> grid,
                             std::span<const ValidationItem> validation,
                             const ClassTable& table, int threads) {
  if (grid.empty()) {
    throw DataError(ErrorCode::kInvalidArgument, "grid_search: empty grid");
  }
  if (validation.empty()) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "grid_search: empty validation set");
  }
  GridSearchResult result;
  double best_score = -1.0;
  MeanFieldOptions options;
  options.threads = threads;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    ConfusionAccumulator acc(table);
    for (const ValidationItem& item : validation) {
      const LabelMap pred =
          refine(item.scores, item.image, item.boxes, item.heatmap, grid[k], options);
      acc.add(pred, item.gt, InstanceSet{}, full_mask(item.gt.width(), item.gt.height()));
    }
    const double score = iou(acc, Level::kClass).mean.value_or(0.0);
    result.table.push_back({grid[k], score});
    if (score > best_score) {
      best_score = score;
      result.best = grid[k];
      result.best_index = k;
    }
  }
  return result;
}

}  // namespace fovea
