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

#include <array>
#include <chrono>
#include <sstream>

#include "cli.hpp"
#include "fovea/dataio.hpp"
#include "fovea/foveaparse.hpp"
#include "fovea/log.hpp"
#include "fovea/synth.hpp"
#include "stages.hpp"

namespace fovea::cli {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::array<const char*, 3> kStages = {"coarse", "fovea", "crf"};
constexpr std::array<RegionKind, 3> kRegions = {
    RegionKind::kFull, RegionKind::kPeripheral, RegionKind::kCentral};

class StageTimer {
 public:
  StageTimer(std::map<std::string, double>& sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(Clock::now()) {}
  ~StageTimer() {
    sink_[name_] += std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::string name_;
  Clock::time_point start_;
};

json mean_or_null(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

PipelineReport run_full_pipeline(const RunConfig& cfg, const fs::path& out_dir,
                                 bool emit_plots) {
  cfg.validate();
  PipelineReport report;
  auto& timings = report.timings;

  {
    StageTimer t(timings, "synth");
    write_synthetic_dataset(cfg, out_dir / "dataset");
  }
  const Dataset dataset = read_dataset(out_dir / "dataset" / "manifest.json");

  HeatmapGtResult gt_maps;
  {
    StageTimer t(timings, "heatmap-gt");
    gt_maps = run_heatmap_gt(dataset, cfg, out_dir / "heatmaps");
  }
  const std::size_t n = dataset.scenes.size();

  std::vector<FoveaRect> rects(n);
  {
    StageTimer t(timings, "fovea");
    fs::create_directories(out_dir / "fovea");
    for (std::size_t i = 0; i < n; ++i) {
      rects[i] = locate_fovea(gt_maps.v[i], cfg.fovea);
      write_text(out_dir / "fovea" / (dataset.scenes[i].name + ".json"),
                 to_json(rects[i]).dump(2) + "\n");
    }
  }

  for (const char* stage : kStages) {
    fs::create_directories(out_dir / "labels" / stage);
  }
  std::vector<RgbImage> images;
  std::vector<LabelMap> gts;
  std::vector<std::array<LabelMap, 3>> preds(n);
  std::vector<ScoreMap> fused(n);
  for (const DatasetEntry& e : dataset.scenes) {
    images.push_back(read_image(e.image));
    gts.push_back(read_label_map(e.gt));
    validate_labels(gts.back(), gt_maps.table);
  }

  {
    StageTimer t(timings, "parse");
    const PipelineConfig pcfg{cfg.fovea, cfg.fusion};
    for (std::size_t i = 0; i < n; ++i) {
      OracleConfig ocfg = cfg.oracle;
      ocfg.rng_seed = derive_seed(cfg.seed, kOracleStream, i);
      OracleClassifier classifier(ScaleOracle(cfg.scene, ocfg), gts[i],
                                  gt_maps.instances[i]);
      ParseResult r = run_pipeline(images[i], classifier, gt_maps.v[i], pcfg);
      if (!(r.rect == rects[i])) {
        throw DataError(ErrorCode::kInvalidArgument,
                        dataset.scenes[i].name +
                            ": parse stage fovea differs from fovea stage");
      }
      preds[i][0] = argmax_labels(r.coarse);
      preds[i][1] = argmax_labels(r.fused);
      fused[i] = std::move(r.fused);
    }
  }

  std::ostringstream trace_csv;
  trace_csv << "scene,iteration,energy\n";
  {
    StageTimer t(timings, "crf");
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> warnings;
      const auto boxes = read_boxes(dataset.scenes[i].boxes, dataset.width,
                                    dataset.height, &warnings);
      for (const std::string& w : warnings) log().warn("{}", w);
      CrfOutput out = run_crf(fused[i], images[i], boxes, gt_maps.v[i], cfg.crf,
                              cfg.threads, emit_plots);
      preds[i][2] = std::move(out.labels);
      for (std::size_t k = 0; k < out.energy_trace.size(); ++k) {
        trace_csv << dataset.scenes[i].name << ',' << k << ','
                  << format_number(out.energy_trace[k]) << '\n';
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < kStages.size(); ++s) {
      write_label_map(preds[i][s], out_dir / "labels" / kStages[s] /
                                       (dataset.scenes[i].name + ".pgm"));
    }
  }

  json stages = json::object();
  json per_scene = json::array();
  std::ostringstream metrics;
  metrics << "stage,region,class,IoU,iIoU\n";
  std::ostringstream plot;
  plot << "stage,IoU_class,iIoU_class,IoU_category,iIoU_category\n";
  {
    StageTimer t(timings, "eval");
    for (std::size_t i = 0; i < n; ++i) {
      json scene = {{"name", dataset.scenes[i].name},
                    {"fovea", to_json(rects[i])}};
      for (std::size_t s = 0; s < kStages.size(); ++s) {
        ConfusionAccumulator acc(gt_maps.table);
        acc.add(preds[i][s], gts[i], gt_maps.instances[i],
                full_mask(dataset.width, dataset.height));
        scene["iIoU_class"][kStages[s]] = mean_or_null(iiou(acc, Level::kClass).mean);
        scene["IoU_class"][kStages[s]] = mean_or_null(iou(acc, Level::kClass).mean);
      }
      per_scene.push_back(std::move(scene));
    }
    for (std::size_t s = 0; s < kStages.size(); ++s) {
      for (RegionKind region : kRegions) {
        const RegionMask mask = make_region_mask(dataset.width, dataset.height,
                                                 region, cfg.metrics.central_frac);
        ConfusionAccumulator acc(gt_maps.table);
        for (std::size_t i = 0; i < n; ++i) {
          acc.add(preds[i][s], gts[i], gt_maps.instances[i], mask);
        }
        const json m = metrics_json(acc);
        stages[kStages[s]][std::string(to_string(region))] = m;
        std::istringstream rows(metrics_csv(acc));
        std::string line;
        std::getline(rows, line);  // header
        while (std::getline(rows, line)) {
          metrics << kStages[s] << ',' << to_string(region) << ',' << line << '\n';
        }
        if (region == RegionKind::kFull) {
          auto cell = [](const json& v) {
            return v.is_null() ? std::string() : format_number(v.get<double>());
          };
          plot << kStages[s] << ',' << cell(m["IoU_class"]) << ','
               << cell(m["iIoU_class"]) << ',' << cell(m["IoU_category"]) << ','
               << cell(m["iIoU_category"]) << '\n';
        }
      }
    }
  }

  write_text(out_dir / "metrics.csv", metrics.str());
  if (emit_plots) {
    fs::create_directories(out_dir / "plots");
    write_text(out_dir / "plots" / "energy_trace.csv", trace_csv.str());
    write_text(out_dir / "plots" / "metric_vs_stage.csv", plot.str());
  }

  report.summary = {{"config", to_json(cfg)},
                    {"stage_order", {"synth", "heatmap-gt", "fovea", "parse",
                                     "crf", "eval"}},
                    {"metrics", stages},
                    {"scenes", per_scene}};
  write_text(out_dir / "summary.json", report.summary.dump(2) + "\n");
  json timing_json = json::object();
  for (const auto& [stage, seconds] : timings) timing_json[stage] = seconds;
  write_text(out_dir / "timings.json", timing_json.dump(2) + "\n");
  return report;
}

}  // namespace fovea::cli
