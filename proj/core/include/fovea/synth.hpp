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

// Synthetic perspective scenes and a scale-dependent classifier oracle.
//
// Objects are axis-aligned rectangles placed at depth z: their on-image size
// is real_size / z and their center sits at distance ray_scale / z from the
// vanishing point along a random direction, so distant objects are small
// and crowd around the vanishing point. Far objects are painted first.
//
// The oracle mimics a pixel classifier whose accuracy depends on apparent
// object size. Each instance is flipped wholesale to its confusable class
// with probability
//   rho = rho_max * min(1, area_ref / (area * scale^2)),
// and instances whose apparent area exceeds breakdown_area get a vertical
// strip covering breakdown_frac of their width scored toward the
// confusable class. Decisions use one uniform draw per instance, shared by
// every scale, so a larger scale never adds whole-instance errors.

#ifndef FOVEA_SYNTH_HPP_
#define FOVEA_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fovea/dataio.hpp"
#include "fovea/foveaparse.hpp"
#include "fovea/types.hpp"

namespace fovea {

struct SceneClass {
  int id = 0;
  std::string name;
  std::string category;
  std::array<std::uint8_t, 3> color{};
  double real_width = 0.0;
  double real_height = 0.0;
  int confusable_id = 0;
};

struct SceneSpec {
  int width = 96;
  int height = 96;
  double vanishing_x = 48.0;
  double vanishing_y = 48.0;
  std::vector<SceneClass> classes;
  int background_id = 0;
  int num_objects = 18;
  double depth_min = 1.0;
  double depth_max = 6.0;
  /// Distance from the vanishing point at depth 1, in pixels.
  double ray_scale = 40.0;
  int color_noise = 6;
  std::uint64_t rng_seed = 0;

  void validate() const;
  /// Road background plus vehicle and human classes with confusable pairs.
  static SceneSpec defaults();
};

/// Classes of a scene spec. Instance classes get no avg_size yet; use
/// compute_average_sizes on generated scenes.
ClassTable scene_class_table(const SceneSpec& spec);

struct Scene {
  RgbImage image;
  InstanceSet instances;
  LabelMap gt;
  std::vector<DetectionBox> boxes;
  std::vector<double> depths;  // per instance
  // boxes[k] and depths[k] belong to instances.instances[k].
};

int projected_size(double real_size, double depth);

Scene generate_scene(const SceneSpec& spec);

/// Rectangle polygons for every instance, in painting order.
std::vector<AnnotationObject> scene_annotations(const Scene& scene,
                                                const ClassTable& table);

struct OracleConfig {
  double rho_max = 0.6;
  double area_ref = 240.0;
  double breakdown_area = 600.0;
  double breakdown_frac = 0.3;
  double margin = 2.0;
  double noise = 0.5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

double misclassification_rate(const OracleConfig& cfg, double area,
                              double scale);

/// Scale-dependent noisy classifier built from ground truth.
class ScaleOracle {
 public:
  ScaleOracle(std::vector<int> confusable, int num_labels, OracleConfig cfg);
  ScaleOracle(const SceneSpec& spec, OracleConfig cfg);

  /// Scores at ground-truth resolution as seen with the given effective
  /// resolution multiplier.
  ScoreMap classify(const LabelMap& gt, const InstanceSet& instances,
                    double scale) const;

  int num_labels() const { return num_labels_; }
  const OracleConfig& config() const { return cfg_; }

 private:
  std::vector<int> confusable_;
  int num_labels_;
  OracleConfig cfg_;
};

ScoreMap oracle_classify(const RgbImage& image, const LabelMap& gt,
                         const InstanceSet& instances, const ScaleOracle& oracle,
                         double scale);

/// PixelClassifier adapter: classifies the branch's source rectangle at the
/// branch scale and returns scores at the branch input resolution.
class OracleClassifier final : public PixelClassifier {
 public:
  OracleClassifier(ScaleOracle oracle, LabelMap gt, InstanceSet instances);
  ScoreMap classify(const RgbImage& image, const BranchView& view) override;
  bool concurrent_safe() const override { return true; }

 private:
  ScaleOracle oracle_;
  LabelMap gt_;
  InstanceSet instances_;
};

}  // namespace fovea

#endif  // FOVEA_SYNTH_HPP_
