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

#include "fovea/perspective.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fovea/resample.hpp"

namespace fovea {
namespace {

void require_same_size(const PerspectiveHeatmap& a, const PerspectiveHeatmap& b,
                       const char* what) {
  if (!a.same_size(b)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    std::string(what) + ": heatmap sizes differ (" +
                        std::to_string(a.width()) + "x" +
                        std::to_string(a.height()) + " vs " +
                        std::to_string(b.width()) + "x" +
                        std::to_string(b.height()) + ")");
  }
}

// Window origins along one axis: 0, stride, 2*stride, ... plus the last
// valid origin when it is off-stride.
std::vector<int> window_origins(int extent, int window, int stride) {
  std::vector<int> origins;
  const int last = extent - window;
  for (int p = 0; p <= last; p += stride) origins.push_back(p);
  if (origins.back() != last) origins.push_back(last);
  return origins;
}

}  // namespace

void HeatmapGtConfig::validate() const {
  if (!(delta >= 0.0) || !(background_value >= 0.0)) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "heatmap config: delta and background_value must be >= 0");
  }
}

ClassTable compute_average_sizes(std::span<const InstanceSet> dataset,
                                 const ClassTable& table) {
  if (dataset.empty()) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "compute_average_sizes: empty dataset");
  }
  std::map<int, std::pair<double, std::int64_t>> totals;
  for (const InstanceSet& set : dataset) {
    for (const Instance& inst : set.instances) {
      if (!table.contains(inst.class_id)) {
        throw DataError(ErrorCode::kUnknownClass,
                        "instance class " + std::to_string(inst.class_id) +
                            " is not in the class table");
      }
      if (inst.area == 0) continue;
      auto& [sum, count] = totals[inst.class_id];
      sum += static_cast<double>(inst.area);
      ++count;
    }
  }
  std::vector<ClassInfo> classes = table.classes();
  for (ClassInfo& c : classes) {
    auto it = totals.find(c.id);
    if (it != totals.end()) {
      c.avg_size = it->second.first / static_cast<double>(it->second.second);
    }
  }
  return ClassTable(std::move(classes));
}

PerspectiveHeatmap heatmap_h(const InstanceSet& instances,
                             const ClassTable& table,
                             const HeatmapGtConfig& cfg) {
  cfg.validate();
  PerspectiveHeatmap h(instances.width, instances.height,
                       static_cast<float>(cfg.background_value));
  for (std::size_t i = 0; i < instances.instances.size(); ++i) {
    const Instance& inst = instances.instances[i];
    const ClassInfo* info = table.find(inst.class_id);
    if (info == nullptr) {
      throw DataError(ErrorCode::kUnknownClass,
                      "instance " + std::to_string(i) + ": class " +
                          std::to_string(inst.class_id) + " not in table");
    }
    if (!info->avg_size) {
      throw DataError(ErrorCode::kMissingAverageSize,
                      "instance " + std::to_string(i) + ": class '" +
                          info->name + "' has no avg_size");
    }
    if (inst.area <= 0) {
      throw DataError(ErrorCode::kZeroArea,
                      "instance " + std::to_string(i) + " has zero area");
    }
    const auto value =
        static_cast<float>(*info->avg_size / static_cast<double>(inst.area));
    for (const PixelRun& run : inst.runs) {
      for (int x = run.x_begin; x < run.x_end; ++x) h(x, run.y) = value;
    }
  }
  return h;
}

PerspectiveHeatmap global_prior(std::span<const PerspectiveHeatmap> heatmaps,
                                int out_width, int out_height) {
  if (heatmaps.empty()) {
    throw DataError(ErrorCode::kInvalidArgument, "global_prior: no heatmaps");
  }
  std::vector<double> sum(static_cast<std::size_t>(out_width) * out_height,
                          0.0);
  for (const PerspectiveHeatmap& h : heatmaps) {
    const PerspectiveHeatmap r =
        resize(h, out_width, out_height, Resample::kBilinear);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += r.values()[i];
  }
  PerspectiveHeatmap g(out_width, out_height);
  const double n = static_cast<double>(heatmaps.size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    g.values()[i] = static_cast<float>(sum[i] / n);
  }
  return g;
}

PerspectiveHeatmap heatmap_v(const PerspectiveHeatmap& h,
                             const PerspectiveHeatmap& g, double delta) {
  require_same_size(h, g, "heatmap_v");
  if (!(delta >= 0.0)) {
    throw DataError(ErrorCode::kInvalidArgument, "heatmap_v: delta must be >= 0");
  }
  PerspectiveHeatmap v(h.width(), h.height());
  for (std::size_t i = 0; i < v.values().size(); ++i) {
    v.values()[i] = static_cast<float>(static_cast<double>(h.values()[i]) +
                                       delta * g.values()[i]);
  }
  return v;
}

double smoothed_l1(const PerspectiveHeatmap& pred,
                   const PerspectiveHeatmap& gt) {
  require_same_size(pred, gt, "smoothed_l1");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    const double x = static_cast<double>(pred.values()[i]) - gt.values()[i];
    const double ax = std::abs(x);
    total += ax < 1.0 ? 0.5 * x * x : ax - 0.5;
  }
  return total / static_cast<double>(pred.values().size());
}

FoveaRect locate_fovea(const PerspectiveHeatmap& heatmap, double win_frac_w,
                       double win_frac_h, int stride) {
  if (!(win_frac_w > 0.0 && win_frac_w <= 1.0) ||
      !(win_frac_h > 0.0 && win_frac_h <= 1.0)) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "locate_fovea: window fractions must be in (0, 1]");
  }
  if (stride < 1) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "locate_fovea: stride must be >= 1");
  }
  const int w = static_cast<int>(std::lround(win_frac_w * heatmap.width()));
  const int h = static_cast<int>(std::lround(win_frac_h * heatmap.height()));
  if (w < 1 || h < 1 || w > heatmap.width() || h > heatmap.height()) {
    throw DataError(ErrorCode::kOutOfRange,
                    "locate_fovea: window " + std::to_string(w) + "x" +
                        std::to_string(h) + " does not fit the heatmap");
  }
  const std::vector<int> xs = window_origins(heatmap.width(), w, stride);
  const std::vector<int> ys = window_origins(heatmap.height(), h, stride);

  // Column sums then row sums, each in a fixed order, so windows with
  // identical contents produce bit-identical sums.
  FoveaRect best{0, 0, w, h, 0.0};
  double best_sum = -1.0;
  std::vector<double> column(static_cast<std::size_t>(heatmap.width()));
  for (int y0 : ys) {
    for (int x = 0; x < heatmap.width(); ++x) {
      double s = 0.0;
      for (int y = y0; y < y0 + h; ++y) s += heatmap(x, y);
      column[static_cast<std::size_t>(x)] = s;
    }
    for (int x0 : xs) {
      double s = 0.0;
      for (int x = x0; x < x0 + w; ++x) s += column[static_cast<std::size_t>(x)];
      if (s > best_sum) {
        best_sum = s;
        best.x0 = x0;
        best.y0 = y0;
      }
    }
  }
  best.mean_score = best_sum / (static_cast<double>(w) * h);
  return best;
}

}  // namespace fovea
