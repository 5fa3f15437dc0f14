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

#include "fovea/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fovea {
namespace {

constexpr int kMaxPlacementTries = 32;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based uniform in [0, 1) keyed by (seed, a, b, c).
double hash_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                    std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ (c + 0x8CB92BA72F3D8DD7ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

enum Stream : std::uint64_t { kFlip = 1, kStrip = 2, kNoise = 3 };

struct Bounds {
  int x0, y0, x1, y1;
};

Bounds bounds_of(const Instance& inst) {
  Bounds b{INT32_MAX, INT32_MAX, INT32_MIN, INT32_MIN};
  for (const PixelRun& r : inst.runs) {
    b.x0 = std::min(b.x0, r.x_begin);
    b.x1 = std::max(b.x1, r.x_end);
    b.y0 = std::min(b.y0, r.y);
    b.y1 = std::max(b.y1, r.y + 1);
  }
  return b;
}

}  // namespace

void SceneSpec::validate() const {
  const bool ok = width > 0 && height > 0 && vanishing_x >= 0 &&
                  vanishing_x < width && vanishing_y >= 0 &&
                  vanishing_y < height && depth_min > 0 &&
                  depth_max >= depth_min && num_objects >= 0 &&
                  ray_scale >= 0 && color_noise >= 0 && !classes.empty();
  if (!ok) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "scene spec: need positive size, vanishing point inside "
                    "the image, 0 < depth_min <= depth_max and a class list");
  }
  bool has_background = false;
  for (const SceneClass& c : classes) {
    has_background |= c.id == background_id;
    if (c.id != background_id && (c.real_width <= 0 || c.real_height <= 0)) {
      throw DataError(ErrorCode::kInvalidArgument,
                      "scene class '" + c.name + "' needs a positive real size");
    }
  }
  if (!has_background) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "scene spec: background class missing from class list");
  }
}

SceneSpec SceneSpec::defaults() {
  SceneSpec spec;
  spec.classes = {
      {0, "road", "flat", {128, 64, 128}, 0, 0, 0},
      {1, "car", "vehicle", {0, 0, 142}, 30, 18, 2},
      {2, "truck", "vehicle", {0, 60, 100}, 40, 26, 1},
      {3, "bus", "vehicle", {0, 80, 100}, 50, 30, 4},
      {4, "train", "vehicle", {0, 100, 100}, 56, 30, 3},
      {5, "person", "human", {220, 20, 60}, 8, 20, 6},
      {6, "rider", "human", {255, 0, 0}, 9, 22, 5},
  };
  return spec;
}

ClassTable scene_class_table(const SceneSpec& spec) {
  std::vector<ClassInfo> classes;
  for (const SceneClass& c : spec.classes) {
    classes.push_back({c.id, c.name, c.category, std::nullopt, true});
  }
  return ClassTable(std::move(classes));
}

int projected_size(double real_size, double depth) {
  return static_cast<int>(std::lround(real_size / depth));
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<const SceneClass*> object_classes;
  for (const SceneClass& c : spec.classes) {
    if (c.id != spec.background_id) object_classes.push_back(&c);
  }

  struct Placed {
    const SceneClass* cls;
    double depth;
    int x0, y0, x1, y1;
  };
  std::vector<Placed> placed;
  if (!object_classes.empty()) {
    for (int k = 0; k < spec.num_objects; ++k) {
      for (int attempt = 0; attempt < kMaxPlacementTries; ++attempt) {
        const auto ci = static_cast<std::size_t>(
            unit(rng) * static_cast<double>(object_classes.size()));
        const SceneClass* cls =
            object_classes[std::min(ci, object_classes.size() - 1)];
        const double z =
            spec.depth_min + unit(rng) * (spec.depth_max - spec.depth_min);
        const double angle = 2.0 * std::numbers::pi * unit(rng);
        const int w = projected_size(cls->real_width, z);
        const int h = projected_size(cls->real_height, z);
        if (w < 1 || h < 1) continue;
        const double r = spec.ray_scale / z;
        const double cx = spec.vanishing_x + r * std::cos(angle);
        const double cy = spec.vanishing_y + r * std::sin(angle);
        const int x0 = static_cast<int>(std::lround(cx - w / 2.0));
        const int y0 = static_cast<int>(std::lround(cy - h / 2.0));
        const int cx0 = std::max(x0, 0);
        const int cy0 = std::max(y0, 0);
        const int cx1 = std::min(x0 + w, spec.width);
        const int cy1 = std::min(y0 + h, spec.height);
        if (cx1 <= cx0 || cy1 <= cy0) continue;
        placed.push_back({cls, z, cx0, cy0, cx1, cy1});
        break;
      }
    }
  }
  // Far objects first so near ones occlude them.
  std::stable_sort(placed.begin(), placed.end(),
                   [](const Placed& a, const Placed& b) { return a.depth > b.depth; });

  InstancePainter painter(spec.width, spec.height);
  for (const Placed& p : placed) {
    painter.paint_rect(p.cls->id, p.x0, p.y0, p.x1, p.y1);
  }
  const InstanceSet painted = painter.finish();

  Scene scene;
  scene.instances.width = spec.width;
  scene.instances.height = spec.height;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    if (painted.instances[i].area == 0) continue;  // fully occluded
    scene.instances.instances.push_back(painted.instances[i]);
    scene.depths.push_back(placed[i].depth);
    const Placed& p = placed[i];
    scene.boxes.push_back({p.x0, p.y0, p.x1, p.y1, 1.0, p.cls->id});
  }

  scene.gt = LabelMap(spec.width, spec.height,
                      static_cast<std::uint16_t>(spec.background_id));
  for (const Instance& inst : scene.instances.instances) {
    for (const PixelRun& r : inst.runs) {
      for (int x = r.x_begin; x < r.x_end; ++x) {
        scene.gt(x, r.y) = static_cast<std::uint16_t>(inst.class_id);
      }
    }
  }

  std::vector<std::array<std::uint8_t, 3>> colors(
      static_cast<std::size_t>(scene_class_table(spec).num_labels()));
  for (const SceneClass& c : spec.classes) {
    colors[static_cast<std::size_t>(c.id)] = c.color;
  }
  std::uniform_int_distribution<int> jitter(-spec.color_noise, spec.color_noise);
  scene.image = RgbImage(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const auto& base = colors[scene.gt(x, y)];
      auto px = scene.image.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        px[static_cast<std::size_t>(c)] =
            static_cast<std::uint8_t>(std::clamp(base[c] + jitter(rng), 0, 255));
      }
    }
  }
  return scene;
}

std::vector<AnnotationObject> scene_annotations(const Scene& scene,
                                                const ClassTable& table) {
  std::vector<AnnotationObject> objects;
  for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
    const DetectionBox& b = scene.boxes[i];
    const ClassInfo* info = table.find(b.class_id);
    if (info == nullptr) {
      throw DataError(ErrorCode::kUnknownClass,
                      "scene box class " + std::to_string(b.class_id));
    }
    objects.push_back({info->name,
                       {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}});
  }
  return objects;
}

void OracleConfig::validate() const {
  const bool ok = rho_max >= 0 && rho_max <= 1 && area_ref > 0 &&
                  breakdown_area >= 0 && breakdown_frac >= 0 &&
                  breakdown_frac <= 1 && margin > 0 && noise >= 0;
  if (!ok) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "oracle config: rho_max and breakdown_frac in [0,1], "
                    "area_ref and margin > 0, noise >= 0");
  }
}

double misclassification_rate(const OracleConfig& cfg, double area,
                              double scale) {
  const double apparent = area * scale * scale;
  if (apparent <= 0.0) return cfg.rho_max;
  return cfg.rho_max * std::min(1.0, cfg.area_ref / apparent);
}

ScaleOracle::ScaleOracle(std::vector<int> confusable, int num_labels,
                         OracleConfig cfg)
    : confusable_(std::move(confusable)), num_labels_(num_labels), cfg_(cfg) {
  cfg_.validate();
  if (num_labels_ < 2) {
    throw DataError(ErrorCode::kInvalidArgument, "oracle needs >= 2 labels");
  }
}

ScaleOracle::ScaleOracle(const SceneSpec& spec, OracleConfig cfg)
    : ScaleOracle({}, scene_class_table(spec).num_labels(), cfg) {
  confusable_.assign(static_cast<std::size_t>(num_labels_), -1);
  for (const SceneClass& c : spec.classes) {
    confusable_[static_cast<std::size_t>(c.id)] = c.confusable_id;
  }
}

ScoreMap ScaleOracle::classify(const LabelMap& gt, const InstanceSet& instances,
                               double scale) const {
  if (!(scale > 0.0)) {
    throw DataError(ErrorCode::kInvalidArgument, "oracle scale must be positive");
  }
  const int width = gt.width();
  const int height = gt.height();
  LabelMap favored = gt;
  for (std::uint16_t& v : favored.values()) {
    if (v == kIgnoreLabel || v >= num_labels_) v = 0;
  }
  auto confusable_of = [&](int cls) {
    if (cls < 0 || static_cast<std::size_t>(cls) >= confusable_.size()) return -1;
    const int c = confusable_[static_cast<std::size_t>(cls)];
    return (c >= 0 && c < num_labels_ && c != cls) ? c : -1;
  };
  for (std::size_t m = 0; m < instances.instances.size(); ++m) {
    const Instance& inst = instances.instances[m];
    const int other = confusable_of(inst.class_id);
    if (other < 0 || inst.area == 0) continue;
    const double area = static_cast<double>(inst.area);
    const double rho = misclassification_rate(cfg_, area, scale);
    if (hash_uniform(cfg_.rng_seed, kFlip, m, 0) < rho) {
      for (const PixelRun& r : inst.runs) {
        for (int x = r.x_begin; x < r.x_end; ++x) {
          favored(x, r.y) = static_cast<std::uint16_t>(other);
        }
      }
      continue;
    }
    if (cfg_.breakdown_frac > 0.0 && area * scale * scale > cfg_.breakdown_area) {
      const Bounds b = bounds_of(inst);
      const int bw = b.x1 - b.x0;
      const int strip = std::max(
          1, static_cast<int>(std::lround(cfg_.breakdown_frac * bw)));
      const int offset = std::min(
          bw - strip,
          static_cast<int>(hash_uniform(cfg_.rng_seed, kStrip, m, 0) *
                           (bw - strip + 1)));
      for (const PixelRun& r : inst.runs) {
        const int xb = std::max(r.x_begin, b.x0 + offset);
        const int xe = std::min(r.x_end, b.x0 + offset + strip);
        for (int x = xb; x < xe; ++x) {
          favored(x, r.y) = static_cast<std::uint16_t>(other);
        }
      }
    }
  }

  ScoreMap scores(width, height, num_labels_);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto s = scores.pixel(x, y);
      const std::uint64_t pixel = static_cast<std::uint64_t>(y) * width + x;
      for (int l = 0; l < num_labels_; ++l) {
        const double jitter =
            cfg_.noise *
            (2.0 * hash_uniform(cfg_.rng_seed, kNoise, pixel,
                                static_cast<std::uint64_t>(l)) -
             1.0);
        const double base = l == favored(x, y) ? cfg_.margin : 0.0;
        s[static_cast<std::size_t>(l)] = static_cast<float>(base + jitter);
      }
    }
  }
  return scores;
}

ScoreMap oracle_classify(const RgbImage& image, const LabelMap& gt,
                         const InstanceSet& instances, const ScaleOracle& oracle,
                         double scale) {
  if (!image.same_size(gt)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "oracle: image and ground truth sizes differ");
  }
  return oracle.classify(gt, instances, scale);
}

OracleClassifier::OracleClassifier(ScaleOracle oracle, LabelMap gt,
                                   InstanceSet instances)
    : oracle_(std::move(oracle)),
      gt_(std::move(gt)),
      instances_(std::move(instances)) {}

ScoreMap OracleClassifier::classify(const RgbImage& image,
                                    const BranchView& view) {
  const ScoreMap full = oracle_.classify(gt_, instances_, view.scale);
  ScoreMap out = crop_and_upscale(full, view.source, view.scale, Resample::kNearest);
  if (!out.same_size(image)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "oracle classifier: view does not match the branch input");
  }
  return out;
}

}  // namespace fovea
