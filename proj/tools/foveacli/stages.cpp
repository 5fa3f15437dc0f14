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

#include "stages.hpp"

#include <cstdio>
#include <sstream>

#include "fovea/dataio.hpp"
#include "fovea/log.hpp"
#include "fovea/resample.hpp"
#include "fovea/synth.hpp"

namespace fovea::cli {

using nlohmann::json;

void require_file(const fs::path& path, const std::string& what) {
  std::error_code ec;
  if (path.empty() || !fs::is_regular_file(path, ec)) {
    throw DataError(ErrorCode::kIo,
                    what + ": no such file '" + path.string() + "'");
  }
}

void require_dir(const fs::path& path, const std::string& what) {
  std::error_code ec;
  if (path.empty() || !fs::is_directory(path, ec)) {
    throw DataError(ErrorCode::kIo,
                    what + ": no such directory '" + path.string() + "'");
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

Dataset write_synthetic_dataset(const RunConfig& cfg, const fs::path& out_dir) {
  for (const char* sub : {"images", "gt", "annotations", "boxes"}) {
    fs::create_directories(out_dir / sub);
  }
  const ClassTable table = scene_class_table(cfg.scene);
  write_class_table(table, out_dir / "classes.json");

  Dataset ds;
  ds.classes = out_dir / "classes.json";
  ds.width = cfg.scene.width;
  ds.height = cfg.scene.height;
  json scenes = json::array();
  for (int i = 0; i < cfg.num_scenes; ++i) {
    SceneSpec spec = cfg.scene;
    spec.rng_seed = derive_seed(cfg.seed, kSceneStream, static_cast<std::uint64_t>(i));
    const Scene scene = generate_scene(spec);
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d", i);
    DatasetEntry e{name,
                   fs::path("images") / (std::string(name) + ".ppm"),
                   fs::path("gt") / (std::string(name) + ".pgm"),
                   fs::path("annotations") / (std::string(name) + ".json"),
                   fs::path("boxes") / (std::string(name) + ".json")};
    write_image(scene.image, out_dir / e.image);
    write_label_map(scene.gt, out_dir / e.gt);
    write_polygon_annotations(scene_annotations(scene, table), spec.width,
                              spec.height, out_dir / e.annotations);
    write_boxes(scene.boxes, out_dir / e.boxes);
    scenes.push_back({{"name", e.name},
                      {"image", e.image.generic_string()},
                      {"gt", e.gt.generic_string()},
                      {"annotations", e.annotations.generic_string()},
                      {"boxes", e.boxes.generic_string()}});
    e.image = out_dir / e.image;
    e.gt = out_dir / e.gt;
    e.annotations = out_dir / e.annotations;
    e.boxes = out_dir / e.boxes;
    ds.scenes.push_back(std::move(e));
  }
  const json manifest = {{"classes", "classes.json"},
                         {"width", ds.width},
                         {"height", ds.height},
                         {"seed", cfg.seed},
                         {"scenes", scenes}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  log().info("synth: wrote {} scenes to {}", cfg.num_scenes, out_dir.string());
  return ds;
}

Dataset read_dataset(const fs::path& manifest) {
  require_file(manifest, "--dataset");
  const json j = read_json(manifest);
  const fs::path root = manifest.parent_path();
  const std::string where = manifest.string();
  Dataset ds;
  try {
    ds.classes = root / j.at("classes").get<std::string>();
    ds.width = j.at("width").get<int>();
    ds.height = j.at("height").get<int>();
    for (const json& s : j.at("scenes")) {
      ds.scenes.push_back({s.at("name").get<std::string>(),
                           root / s.at("image").get<std::string>(),
                           root / s.at("gt").get<std::string>(),
                           root / s.at("annotations").get<std::string>(),
                           root / s.at("boxes").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw DataError(ErrorCode::kMalformed, where + ": " + e.what());
  }
  require_file(ds.classes, where + " classes");
  for (const DatasetEntry& e : ds.scenes) {
    require_file(e.image, where + " image");
    require_file(e.gt, where + " gt");
    require_file(e.annotations, where + " annotations");
    require_file(e.boxes, where + " boxes");
  }
  if (ds.scenes.empty()) {
    throw DataError(ErrorCode::kMalformed, where + ": no scenes");
  }
  return ds;
}

HeatmapGtResult run_heatmap_gt(const Dataset& dataset, const RunConfig& cfg,
                               const fs::path& out_dir) {
  fs::create_directories(out_dir / "heatmaps");
  HeatmapGtResult r;
  const ClassTable base = read_class_table(dataset.classes);
  for (const DatasetEntry& e : dataset.scenes) {
    std::vector<std::string> warnings;
    r.instances.push_back(ingest_polygon_annotations(
        e.annotations, base, dataset.width, dataset.height, &warnings));
    for (const std::string& w : warnings) log().warn("{}: {}", e.annotations.string(), w);
  }
  r.table = compute_average_sizes(r.instances, base);
  r.classes_path = out_dir / "classes.json";
  write_class_table(r.table, r.classes_path);

  for (const InstanceSet& inst : r.instances) {
    r.h.push_back(heatmap_h(inst, r.table, cfg.heatmap));
  }
  r.prior = global_prior(r.h, dataset.width, dataset.height);
  write_tensor(r.prior, out_dir / "global_prior.fvt");

  json scenes = json::array();
  for (std::size_t i = 0; i < r.h.size(); ++i) {
    const std::string& name = dataset.scenes[i].name;
    r.v.push_back(heatmap_v(r.h[i], r.prior, cfg.heatmap.delta));
    const fs::path h_rel = fs::path("heatmaps") / (name + "_h.fvt");
    const fs::path v_rel = fs::path("heatmaps") / (name + "_v.fvt");
    write_tensor(r.h[i], out_dir / h_rel);
    write_tensor(r.v[i], out_dir / v_rel);
    r.v_paths.push_back(out_dir / v_rel);
    scenes.push_back({{"name", name},
                      {"h", h_rel.generic_string()},
                      {"v", v_rel.generic_string()}});
  }
  const json manifest = {{"classes", "classes.json"},
                         {"global_prior", "global_prior.fvt"},
                         {"delta", cfg.heatmap.delta},
                         {"scenes", scenes}};
  write_text(out_dir / "heatmaps.json", manifest.dump(2) + "\n");
  return r;
}

json to_json(const FoveaRect& rect) {
  return {{"x0", rect.x0},
          {"y0", rect.y0},
          {"width", rect.width},
          {"height", rect.height},
          {"mean_score", rect.mean_score}};
}

CrfOutput run_crf(const ScoreMap& scores, const RgbImage& image,
                  const std::vector<DetectionBox>& boxes,
                  const PerspectiveHeatmap& heatmap, const CrfParams& params,
                  int threads, bool trace) {
  if (!scores.same_size(image)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "crf: scores are " + std::to_string(scores.width()) + "x" +
                        std::to_string(scores.height()) + " but image is " +
                        std::to_string(image.width()) + "x" +
                        std::to_string(image.height()));
  }
  const ScoreMap unary = unary_from_scores(scores);
  const std::vector<PixelFeature> features = pixel_features(image);
  CrfOutput out;
  MeanFieldOptions options;
  options.threads = threads;
  if (trace) {
    out.energy_trace.push_back(
        energy(argmax_labels(scores), unary, features, boxes, heatmap, params));
    options.observer = [&](int, const Marginals& q) {
      out.energy_trace.push_back(
          energy(q.argmax(), unary, features, boxes, heatmap, params));
    };
  }
  out.labels = mean_field(unary, features, boxes, heatmap, params, options).argmax();
  return out;
}

std::string energy_trace_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os << "iteration,energy\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    os << i << ',' << format_number(trace[i]) << '\n';
  }
  return os.str();
}

namespace {

json optional_value(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string optional_text(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

const std::optional<double>* find_entry(const MetricTable& t,
                                        const std::string& name) {
  for (const MetricEntry& e : t.entries) {
    if (e.name == name) return &e.value;
  }
  return nullptr;
}

}  // namespace

json metrics_json(const ConfusionAccumulator& acc) {
  const MetricTable ic = iou(acc, Level::kClass);
  const MetricTable iic = iiou(acc, Level::kClass);
  const MetricTable ik = iou(acc, Level::kCategory);
  const MetricTable iik = iiou(acc, Level::kCategory);
  auto entries = [](const MetricTable& a, const MetricTable& b) {
    json out = json::object();
    for (const MetricEntry& e : a.entries) {
      const auto* other = find_entry(b, e.name);
      out[e.name] = {{"IoU", optional_value(e.value)},
                     {"iIoU", other ? optional_value(*other) : json(nullptr)}};
    }
    return out;
  };
  return {{"IoU_class", optional_value(ic.mean)},
          {"iIoU_class", optional_value(iic.mean)},
          {"IoU_category", optional_value(ik.mean)},
          {"iIoU_category", optional_value(iik.mean)},
          {"classes", entries(ic, iic)},
          {"categories", entries(ik, iik)}};
}

std::string metrics_csv(const ConfusionAccumulator& acc) {
  std::ostringstream os;
  os << "class,IoU,iIoU\n";
  const auto rows = [&](const MetricTable& a, const MetricTable& b,
                        const std::string& prefix) {
    for (const MetricEntry& e : a.entries) {
      const auto* other = find_entry(b, e.name);
      os << prefix << e.name << ',' << optional_text(e.value) << ','
         << (other ? optional_text(*other) : std::string()) << '\n';
    }
  };
  rows(iou(acc, Level::kClass), iiou(acc, Level::kClass), "");
  rows(iou(acc, Level::kCategory), iiou(acc, Level::kCategory), "category:");
  return os.str();
}

}  // namespace fovea::cli
