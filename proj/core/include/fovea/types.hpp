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

#ifndef FOVEA_TYPES_HPP_
#define FOVEA_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fovea/error.hpp"

namespace fovea {

/// Dense row-major grid with interleaved channels. Pixel (x, y) channel c
/// lives at ((y * width + x) * channels + c).
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0 || channels <= 0) {
      throw DataError(ErrorCode::kZeroDimension,
                      "grid dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return data_.empty(); }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<T> pixel(int x, int y) {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }
  std::span<const T> pixel(int x, int y) const {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }
  std::span<T> pixel(std::size_t i) {
    return {data_.data() + i * channels_, static_cast<std::size_t>(channels_)};
  }
  std::span<const T> pixel(std::size_t i) const {
    return {data_.data() + i * channels_, static_cast<std::size_t>(channels_)};
  }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool same_shape(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }
  template <typename U>
  bool same_size(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

inline constexpr std::uint16_t kIgnoreLabel = 65535;

/// Per-pixel class ids. kIgnoreLabel marks pixels excluded from statistics.
class LabelMap : public Grid<std::uint16_t> {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, std::uint16_t fill = 0)
      : Grid(width, height, 1, fill) {}
  static constexpr std::uint16_t ignore_id() { return kIgnoreLabel; }
  std::uint16_t& operator()(int x, int y) { return at(x, y); }
  std::uint16_t operator()(int x, int y) const { return at(x, y); }
};

/// Per-pixel, per-label real scores. Channel index is the label id.
class ScoreMap : public Grid<float> {
 public:
  ScoreMap() = default;
  ScoreMap(int width, int height, int num_labels, float fill = 0.0f)
      : Grid(width, height, num_labels, fill) {
    if (num_labels < 2) {
      throw DataError(ErrorCode::kInvalidArgument,
                      "score map needs at least two labels");
    }
  }
  int num_labels() const { return channels(); }
};

/// Non-negative per-pixel perspective score; larger means closer to the
/// vanishing point.
class PerspectiveHeatmap : public Grid<float> {
 public:
  PerspectiveHeatmap() = default;
  PerspectiveHeatmap(int width, int height, float fill = 0.0f)
      : Grid(width, height, 1, fill) {}
  float& operator()(int x, int y) { return at(x, y); }
  float operator()(int x, int y) const { return at(x, y); }
};

/// 8-bit interleaved RGB image.
class RgbImage : public Grid<std::uint8_t> {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, std::uint8_t fill = 0)
      : Grid(width, height, 3, fill) {}
};

/// Half-open horizontal run [x_begin, x_end) on row y.
struct PixelRun {
  int y = 0;
  int x_begin = 0;
  int x_end = 0;
  int length() const { return x_end - x_begin; }
  friend bool operator==(const PixelRun&, const PixelRun&) = default;
};

struct Instance {
  int class_id = 0;
  std::vector<PixelRun> runs;
  std::int64_t area = 0;
  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Instance annotations of one image. Regions are disjoint; on overlap the
/// later instance owns the shared pixels.
struct InstanceSet {
  int width = 0;
  int height = 0;
  std::vector<Instance> instances;
  friend bool operator==(const InstanceSet&, const InstanceSet&) = default;
};

/// Paints instances in order (later wins) and returns a disjoint set whose
/// runs and areas reflect the final ownership.
class InstancePainter {
 public:
  InstancePainter(int width, int height);
  /// Paints `runs` for a new instance; returns its index.
  int paint(int class_id, std::span<const PixelRun> runs);
  int paint_rect(int class_id, int x0, int y0, int x1, int y1);
  InstanceSet finish() const;

 private:
  Grid<std::int32_t> owner_;
  std::vector<int> classes_;
};

/// Per-pixel index into InstanceSet::instances, or -1.
Grid<std::int32_t> instance_index_map(const InstanceSet& set);

struct ClassInfo {
  int id = 0;
  std::string name;
  std::string category;
  std::optional<double> avg_size;
  bool evaluable = true;
  friend bool operator==(const ClassInfo&, const ClassInfo&) = default;
};

class ClassTable {
 public:
  ClassTable() = default;
  explicit ClassTable(std::vector<ClassInfo> classes);

  const std::vector<ClassInfo>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  const ClassInfo* find(int id) const;
  ClassInfo* find(int id);
  const ClassInfo* find_by_name(const std::string& name) const;
  bool contains(int id) const { return find(id) != nullptr; }
  /// Largest id plus one; the label dimension of score maps over this table.
  int num_labels() const;
  /// Category names in order of first appearance.
  std::vector<std::string> categories() const;

  friend bool operator==(const ClassTable&, const ClassTable&) = default;

 private:
  std::vector<ClassInfo> classes_;
};

/// Axis-aligned half-open box [x0, x1) x [y0, y1) with a detection score.
struct DetectionBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  double score = 0.0;
  int class_id = 0;

  bool contains(int x, int y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  std::int64_t area() const {
    return static_cast<std::int64_t>(x1 - x0) * (y1 - y0);
  }
  friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

}  // namespace fovea

#endif  // FOVEA_TYPES_HPP_
