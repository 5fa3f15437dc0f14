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

#include "cli.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fovea/dataio.hpp"
#include "fovea/foveaparse.hpp"
#include "fovea/log.hpp"
#include "fovea/synth.hpp"
#include "stages.hpp"

namespace fovea::cli {
namespace {

using nlohmann::json;
using Override = std::function<void(RunConfig&)>;

struct Common {
  std::string config;
  std::string out_dir;
  bool emit_plots = false;
  std::vector<Override> overrides;
};

template <typename T, typename Apply>
void add_override(CLI::App* sub, Common& common, const std::string& flag,
                  const std::string& help, Apply apply) {
  sub->add_option_function<T>(
      flag,
      [&common, apply](const T& v) {
        common.overrides.push_back([apply, v](RunConfig& c) { apply(c, v); });
      },
      help);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration");
  sub->add_option("--out-dir", c.out_dir, "Directory for all outputs")->required();
  sub->add_flag("--emit-plots", c.emit_plots, "Also write CSV plot series");
  add_override<std::uint64_t>(sub, c, "--seed", "Global random seed",
                              [](RunConfig& r, std::uint64_t v) { r.seed = v; });
  add_override<int>(sub, c, "--threads", "Worker threads within a stage",
                    [](RunConfig& r, int v) { r.threads = v; });
}

void add_scene_flags(CLI::App* sub, Common& c) {
  add_override<int>(sub, c, "--num-scenes", "Number of scenes",
                    [](RunConfig& r, int v) { r.num_scenes = v; });
  add_override<int>(sub, c, "--num-objects", "Objects per scene",
                    [](RunConfig& r, int v) { r.scene.num_objects = v; });
}

void add_heatmap_flags(CLI::App* sub, Common& c) {
  add_override<double>(sub, c, "--delta", "Weight of the global prior",
                       [](RunConfig& r, double v) { r.heatmap.delta = v; });
  add_override<double>(sub, c, "--background", "Heatmap value off instances",
                       [](RunConfig& r, double v) { r.heatmap.background_value = v; });
}

void add_fovea_flags(CLI::App* sub, Common& c) {
  add_override<double>(sub, c, "--frac-w", "Fovea width fraction",
                       [](RunConfig& r, double v) { r.fovea.win_frac_w = v; });
  add_override<double>(sub, c, "--frac-h", "Fovea height fraction",
                       [](RunConfig& r, double v) { r.fovea.win_frac_h = v; });
  add_override<int>(sub, c, "--stride", "Fovea search stride",
                    [](RunConfig& r, int v) { r.fovea.stride = v; });
}

void add_fusion_flags(CLI::App* sub, Common& c) {
  add_override<std::string>(
      sub, c, "--fusion-mode", "replace | average",
      [](RunConfig& r, const std::string& v) { r.fusion.mode = parse_fusion_mode(v); });
  add_override<int>(sub, c, "--upscale", "Fovea upscale factor",
                    [](RunConfig& r, int v) { r.fusion.upscale_factor = v; });
  add_override<std::string>(
      sub, c, "--resample", "Score downscaling: nearest | bilinear",
      [](RunConfig& r, const std::string& v) { r.fusion.resample = parse_resample(v); });
}

void add_oracle_flags(CLI::App* sub, Common& c) {
  add_override<double>(sub, c, "--rho-max", "Oracle peak flip probability",
                       [](RunConfig& r, double v) { r.oracle.rho_max = v; });
  add_override<double>(sub, c, "--area-ref", "Oracle reference area",
                       [](RunConfig& r, double v) { r.oracle.area_ref = v; });
  add_override<double>(sub, c, "--breakdown-area", "Oracle breakdown area",
                       [](RunConfig& r, double v) { r.oracle.breakdown_area = v; });
}

void add_crf_flags(CLI::App* sub, Common& c) {
  add_override<double>(sub, c, "--w1", "Appearance kernel weight",
                       [](RunConfig& r, double v) { r.crf.w1 = v; });
  add_override<double>(sub, c, "--w2", "Smoothness kernel weight",
                       [](RunConfig& r, double v) { r.crf.w2 = v; });
  add_override<double>(sub, c, "--theta-alpha", "Appearance spatial bandwidth",
                       [](RunConfig& r, double v) { r.crf.theta_alpha = v; });
  add_override<double>(sub, c, "--theta-beta", "Appearance color bandwidth",
                       [](RunConfig& r, double v) { r.crf.theta_beta = v; });
  add_override<double>(sub, c, "--theta-gamma", "Smoothness spatial bandwidth",
                       [](RunConfig& r, double v) { r.crf.theta_gamma = v; });
  add_override<int>(sub, c, "--iterations", "Mean-field iterations",
                    [](RunConfig& r, int v) { r.crf.iterations = v; });
  add_override<double>(sub, c, "--mu-fallback", "Support outside every box",
                       [](RunConfig& r, double v) { r.crf.mu_fallback = v; });
}

void add_metric_flags(CLI::App* sub, Common& c) {
  add_override<std::string>(
      sub, c, "--region", "full | peripheral | central",
      [](RunConfig& r, const std::string& v) { r.metrics.region = parse_region_kind(v); });
  add_override<double>(sub, c, "--central-frac", "Central region fraction",
                       [](RunConfig& r, double v) { r.metrics.central_frac = v; });
}

RunConfig build_config(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) {
    require_file(c.config, "--config");
    cfg = load_run_config(c.config);
  }
  for (const Override& o : c.overrides) o(cfg);
  cfg.validate();
  return cfg;
}

// Subcommand inputs.
struct Inputs {
  std::string dataset;
  std::vector<std::string> heatmaps;
  std::string heatmap;
  std::string image;
  std::string classifier = "file";
  std::string coarse_scores;
  std::string fovea_scores;
  std::string gt;
  std::string annotations;
  std::string classes;
  std::string scores;
  std::string boxes;
  std::string params;
  bool trace = false;
  std::string grid;
  std::string validation;
  std::string pred_dir;
  std::string gt_dir;
  std::string annotations_dir;
  int width = 0;
  int height = 0;
};

void cmd_synth(const RunConfig& cfg, const Common& c) {
  write_synthetic_dataset(cfg, c.out_dir);
}

void cmd_heatmap_gt(const RunConfig& cfg, const Common& c, const Inputs& in) {
  const Dataset ds = read_dataset(in.dataset);
  run_heatmap_gt(ds, cfg, c.out_dir);
}

void cmd_global_prior(const Common& c, const Inputs& in) {
  for (const std::string& p : in.heatmaps) require_file(p, "--heatmap");
  std::vector<PerspectiveHeatmap> maps;
  for (const std::string& p : in.heatmaps) maps.push_back(read_heatmap(p));
  const int w = in.width > 0 ? in.width : maps.front().width();
  const int h = in.height > 0 ? in.height : maps.front().height();
  fs::create_directories(c.out_dir);
  write_tensor(global_prior(maps, w, h), fs::path(c.out_dir) / "global_prior.fvt");
}

void cmd_fovea(const RunConfig& cfg, const Common& c, const Inputs& in) {
  require_file(in.heatmap, "--heatmap");
  const FoveaRect rect = locate_fovea(read_heatmap(in.heatmap), cfg.fovea);
  fs::create_directories(c.out_dir);
  write_text(fs::path(c.out_dir) / "fovea.json", to_json(rect).dump(2) + "\n");
}

void cmd_parse(const RunConfig& cfg, const Common& c, const Inputs& in) {
  require_file(in.image, "--image");
  require_file(in.heatmap, "--heatmap");
  std::unique_ptr<PixelClassifier> classifier;
  if (in.classifier == "file") {
    require_file(in.coarse_scores, "--coarse-scores");
    require_file(in.fovea_scores, "--fovea-scores");
    classifier = std::make_unique<FileBackedClassifier>(
        read_scores(in.coarse_scores), read_scores(in.fovea_scores));
  } else if (in.classifier == "oracle") {
    require_file(in.gt, "--gt");
    require_file(in.annotations, "--annotations");
    require_file(in.classes, "--classes");
    const ClassTable table = read_class_table(in.classes);
    LabelMap gt = read_label_map(in.gt);
    validate_labels(gt, table);
    std::vector<std::string> warnings;
    InstanceSet instances = ingest_polygon_annotations(
        in.annotations, table, gt.width(), gt.height(), &warnings);
    for (const std::string& w : warnings) log().warn("{}: {}", in.annotations, w);
    OracleConfig ocfg = cfg.oracle;
    ocfg.rng_seed = derive_seed(cfg.seed, kOracleStream, 0);
    classifier = std::make_unique<OracleClassifier>(
        ScaleOracle(cfg.scene, ocfg), std::move(gt), std::move(instances));
  } else {
    throw DataError(ErrorCode::kInvalidArgument,
                    "--classifier: expected file or oracle, got '" +
                        in.classifier + "'");
  }
  const RgbImage image = read_image(in.image);
  const PerspectiveHeatmap heatmap = read_heatmap(in.heatmap);
  const ParseResult r =
      run_pipeline(image, *classifier, heatmap, PipelineConfig{cfg.fovea, cfg.fusion});
  const fs::path out(c.out_dir);
  fs::create_directories(out);
  write_tensor(r.fused, out / "fused.fvt");
  write_label_map(argmax_labels(r.fused), out / "labels.pgm");
  write_text(out / "fovea.json", to_json(r.rect).dump(2) + "\n");
}

void cmd_crf(RunConfig cfg, const Common& c, const Inputs& in,
             const std::vector<Override>& overrides) {
  require_file(in.scores, "--scores");
  require_file(in.image, "--image");
  require_file(in.boxes, "--boxes");
  require_file(in.heatmap, "--heatmap");
  if (!in.params.empty()) {
    require_file(in.params, "--params");
    try {
      cfg.crf = parse_crf_params(read_json(in.params), cfg.crf);
    } catch (const DataError& e) {
      throw DataError(e.code(), in.params + ": " + e.what());
    }
    // Flags still win over the params file.
    for (const Override& o : overrides) o(cfg);
    cfg.validate();
  }
  const ScoreMap scores = read_scores(in.scores);
  const RgbImage image = read_image(in.image);
  std::vector<std::string> warnings;
  const auto boxes = read_boxes(in.boxes, image.width(), image.height(), &warnings);
  for (const std::string& w : warnings) log().warn("{}: {}", in.boxes, w);
  const PerspectiveHeatmap heatmap = read_heatmap(in.heatmap);
  const bool trace = in.trace || c.emit_plots;
  const CrfOutput out =
      run_crf(scores, image, boxes, heatmap, cfg.crf, cfg.threads, trace);
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  write_label_map(out.labels, dir / "labels.pgm");
  if (trace) write_text(dir / "energy_trace.csv", energy_trace_csv(out.energy_trace));
}

void cmd_tune_crf(const RunConfig& cfg, const Common& c, const Inputs& in) {
  require_file(in.grid, "--grid");
  require_file(in.validation, "--validation");
  std::vector<CrfParams> grid;
  try {
    grid = expand_param_grid(read_json(in.grid), cfg.crf);
  } catch (const DataError& e) {
    throw DataError(e.code(), in.grid + ": " + e.what());
  }
  const json vj = read_json(in.validation);
  const fs::path root = fs::path(in.validation).parent_path();
  std::vector<ValidationItem> items;
  ClassTable table;
  try {
    const fs::path classes = root / vj.at("classes").get<std::string>();
    require_file(classes, in.validation + " classes");
    table = read_class_table(classes);
    for (const json& it : vj.at("items")) {
      const fs::path image = root / it.at("image").get<std::string>();
      const fs::path scores = root / it.at("scores").get<std::string>();
      const fs::path boxes = root / it.at("boxes").get<std::string>();
      const fs::path heatmap = root / it.at("heatmap").get<std::string>();
      const fs::path gt = root / it.at("gt").get<std::string>();
      for (const fs::path& p : {image, scores, boxes, heatmap, gt}) {
        require_file(p, in.validation + " item");
      }
      ValidationItem item;
      item.image = read_image(image);
      item.scores = read_scores(scores);
      item.boxes = read_boxes(boxes, item.image.width(), item.image.height());
      item.heatmap = read_heatmap(heatmap);
      item.gt = read_label_map(gt);
      validate_labels(item.gt, table);
      items.push_back(std::move(item));
    }
  } catch (const json::exception& e) {
    throw DataError(ErrorCode::kMalformed, in.validation + ": " + e.what());
  }
  const GridSearchResult result = grid_search(grid, items, table, cfg.threads);
  std::ostringstream csv;
  csv << "index,w1,w2,theta_alpha,theta_beta,theta_gamma,iterations,"
         "mu_fallback,mean_iou\n";
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const CrfParams& p = result.table[i].params;
    csv << i << ',' << format_number(p.w1) << ',' << format_number(p.w2) << ','
        << format_number(p.theta_alpha) << ',' << format_number(p.theta_beta)
        << ',' << format_number(p.theta_gamma) << ',' << p.iterations << ','
        << format_number(p.mu_fallback) << ','
        << format_number(result.table[i].mean_iou) << '\n';
  }
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  write_text(dir / "crf_scores.csv", csv.str());
  json best = to_json(result.best);
  write_text(dir / "best_params.json", best.dump(2) + "\n");
}

void cmd_eval(const RunConfig& cfg, const Common& c, const Inputs& in) {
  require_dir(in.pred_dir, "--pred-dir");
  require_dir(in.gt_dir, "--gt-dir");
  require_file(in.classes, "--classes");
  if (!in.annotations_dir.empty()) require_dir(in.annotations_dir, "--annotations-dir");
  const ClassTable table = read_class_table(in.classes);

  std::vector<fs::path> gt_files;
  for (const auto& entry : fs::directory_iterator(in.gt_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      gt_files.push_back(entry.path());
    }
  }
  std::sort(gt_files.begin(), gt_files.end());
  if (gt_files.empty()) {
    throw DataError(ErrorCode::kIo, "--gt-dir: no .pgm files in '" + in.gt_dir + "'");
  }
  for (const fs::path& g : gt_files) {
    require_file(fs::path(in.pred_dir) / g.filename(), "--pred-dir");
    if (!in.annotations_dir.empty()) {
      require_file(fs::path(in.annotations_dir) / (g.stem().string() + ".json"),
                   "--annotations-dir");
    }
  }

  ConfusionAccumulator acc(table);
  for (const fs::path& g : gt_files) {
    const LabelMap gt = read_label_map(g);
    const LabelMap pred = read_label_map(fs::path(in.pred_dir) / g.filename());
    validate_labels(gt, table);
    if (!pred.same_size(gt)) {
      throw DataError(ErrorCode::kDimensionMismatch,
                      g.filename().string() + ": prediction and ground truth sizes differ");
    }
    InstanceSet instances{gt.width(), gt.height(), {}};
    if (!in.annotations_dir.empty()) {
      instances = ingest_polygon_annotations(
          fs::path(in.annotations_dir) / (g.stem().string() + ".json"), table,
          gt.width(), gt.height());
    }
    acc.add(pred, gt, instances,
            make_region_mask(gt.width(), gt.height(), cfg.metrics.region,
                             cfg.metrics.central_frac));
  }
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  write_text(dir / "metrics.csv", metrics_csv(acc));
  json summary = metrics_json(acc);
  summary["region"] = std::string(to_string(cfg.metrics.region));
  summary["num_images"] = gt_files.size();
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

void cmd_pipeline(const RunConfig& cfg, const Common& c) {
  const PipelineReport report = run_full_pipeline(cfg, c.out_dir, c.emit_plots);
  for (const auto& [stage, seconds] : report.timings) {
    log().info("{}: {:.3f} s", stage, seconds);
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Perspective-aware scene parsing toolkit", "foveacli"};
  app.require_subcommand(1);
  Common common;
  Inputs in;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene dataset");
  add_common(synth, common);
  add_scene_flags(synth, common);

  auto* hgt = app.add_subcommand("heatmap-gt", "Perspective heatmap ground truth");
  add_common(hgt, common);
  hgt->add_option("--dataset", in.dataset, "Dataset manifest JSON")->required();
  add_heatmap_flags(hgt, common);

  auto* prior = app.add_subcommand("global-prior", "Mean of resampled heatmaps");
  add_common(prior, common);
  prior->add_option("--heatmap", in.heatmaps, "Heatmap FVT1 files")->required();
  prior->add_option("--width", in.width, "Output width (default: first input)");
  prior->add_option("--height", in.height, "Output height (default: first input)");

  auto* fovea = app.add_subcommand("fovea", "Locate the fovea region");
  add_common(fovea, common);
  fovea->add_option("--heatmap", in.heatmap, "Heatmap FVT1 file")->required();
  add_fovea_flags(fovea, common);

  auto* parse = app.add_subcommand("parse", "Two-branch parse and fusion");
  add_common(parse, common);
  parse->add_option("--image", in.image, "Input PPM image")->required();
  parse->add_option("--heatmap", in.heatmap, "Heatmap FVT1 file")->required();
  parse->add_option("--classifier", in.classifier, "file | oracle")
      ->check(CLI::IsMember({"file", "oracle"}));
  parse->add_option("--coarse-scores", in.coarse_scores, "Coarse branch ScoreMap");
  parse->add_option("--fovea-scores", in.fovea_scores, "Fovea branch ScoreMap");
  parse->add_option("--gt", in.gt, "Ground-truth PGM for the oracle");
  parse->add_option("--annotations", in.annotations, "Annotations for the oracle");
  parse->add_option("--classes", in.classes, "Class table for the oracle");
  add_fovea_flags(parse, common);
  add_fusion_flags(parse, common);
  add_oracle_flags(parse, common);

  auto* crf = app.add_subcommand("crf", "Perspective-aware CRF refinement");
  add_common(crf, common);
  crf->add_option("--scores", in.scores, "ScoreMap FVT1 file")->required();
  crf->add_option("--image", in.image, "Input PPM image")->required();
  crf->add_option("--boxes", in.boxes, "Detection boxes JSON")->required();
  crf->add_option("--heatmap", in.heatmap, "Heatmap FVT1 file")->required();
  crf->add_option("--params", in.params, "CRF parameter JSON");
  crf->add_flag("--trace", in.trace, "Write the per-iteration energy trace");
  add_crf_flags(crf, common);

  auto* tune = app.add_subcommand("tune-crf", "Grid search over CRF parameters");
  add_common(tune, common);
  tune->add_option("--grid", in.grid, "Parameter grid JSON")->required();
  tune->add_option("--validation", in.validation, "Validation set JSON")->required();
  add_crf_flags(tune, common);

  auto* eval = app.add_subcommand("eval", "IoU and iIoU evaluation");
  add_common(eval, common);
  eval->add_option("--pred-dir", in.pred_dir, "Predicted PGM directory")->required();
  eval->add_option("--gt-dir", in.gt_dir, "Ground-truth PGM directory")->required();
  eval->add_option("--classes", in.classes, "Class table JSON")->required();
  eval->add_option("--annotations-dir", in.annotations_dir,
                   "Polygon annotations for instance weights");
  add_metric_flags(eval, common);

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  add_common(pipeline, common);
  add_scene_flags(pipeline, common);
  add_heatmap_flags(pipeline, common);
  add_fovea_flags(pipeline, common);
  add_fusion_flags(pipeline, common);
  add_oracle_flags(pipeline, common);
  add_crf_flags(pipeline, common);
  add_metric_flags(pipeline, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return kExitOk;
    }
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* shown = &app;
    for (const CLI::App* sub : app.get_subcommands()) shown = sub;
    std::cerr << shown->help();
    return kExitUsage;
  }

  try {
    const RunConfig cfg = build_config(common);
    log().debug("out-dir {}", common.out_dir);
    if (synth->parsed()) cmd_synth(cfg, common);
    if (hgt->parsed()) cmd_heatmap_gt(cfg, common, in);
    if (prior->parsed()) cmd_global_prior(common, in);
    if (fovea->parsed()) cmd_fovea(cfg, common, in);
    if (parse->parsed()) cmd_parse(cfg, common, in);
    if (crf->parsed()) cmd_crf(cfg, common, in, common.overrides);
    if (tune->parsed()) cmd_tune_crf(cfg, common, in);
    if (eval->parsed()) cmd_eval(cfg, common, in);
    if (pipeline->parsed()) cmd_pipeline(cfg, common);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace fovea::cli
