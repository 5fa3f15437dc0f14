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

#include "config.hpp"

#include <algorithm>
#include <initializer_list>
#include <string_view>

#include "fovea/dataio.hpp"

namespace fovea::cli {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw DataError(ErrorCode::kMalformed, where + ": expected a JSON object");
  }
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw DataError(ErrorCode::kMalformed,
                      where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(ErrorCode::kMalformed,
                    where + "." + key + ": wrong type");
  }
}

SceneClass parse_scene_class(const json& j, const std::string& where) {
  check_keys(j, {"id", "name", "category", "color", "real_size", "confusable"},
             where);
  SceneClass c;
  read_field(j, "id", c.id, where);
  read_field(j, "name", c.name, where);
  read_field(j, "category", c.category, where);
  std::vector<int> color{0, 0, 0};
  read_field(j, "color", color, where);
  if (color.size() != 3) {
    throw DataError(ErrorCode::kMalformed, where + ".color: need [r, g, b]");
  }
  for (std::size_t k = 0; k < 3; ++k) {
    c.color[k] = static_cast<std::uint8_t>(std::clamp(color[k], 0, 255));
  }
  std::vector<double> size{0.0, 0.0};
  read_field(j, "real_size", size, where);
  if (size.size() != 2) {
    throw DataError(ErrorCode::kMalformed, where + ".real_size: need [w, h]");
  }
  c.real_width = size[0];
  c.real_height = size[1];
  c.confusable_id = c.id;
  read_field(j, "confusable", c.confusable_id, where);
  return c;
}

void parse_scene(const json& j, SceneSpec& s) {
  const std::string where = "scene";
  check_keys(j, {"width", "height", "vanishing_point", "num_objects",
                 "depth_range", "ray_scale", "color_noise", "background_id",
                 "classes"},
             where);
  read_field(j, "width", s.width, where);
  read_field(j, "height", s.height, where);
  if (j.contains("vanishing_point")) {
    std::vector<double> vp;
    read_field(j, "vanishing_point", vp, where);
    if (vp.size() != 2) {
      throw DataError(ErrorCode::kMalformed, "scene.vanishing_point: need [x, y]");
    }
    s.vanishing_x = vp[0];
    s.vanishing_y = vp[1];
  } else {
    s.vanishing_x = s.width / 2.0;
    s.vanishing_y = s.height / 2.0;
  }
  read_field(j, "num_objects", s.num_objects, where);
  if (j.contains("depth_range")) {
    std::vector<double> d;
    read_field(j, "depth_range", d, where);
    if (d.size() != 2) {
      throw DataError(ErrorCode::kMalformed, "scene.depth_range: need [min, max]");
    }
    s.depth_min = d[0];
    s.depth_max = d[1];
  }
  read_field(j, "ray_scale", s.ray_scale, where);
  read_field(j, "color_noise", s.color_noise, where);
  read_field(j, "background_id", s.background_id, where);
  if (j.contains("classes")) {
    if (!j["classes"].is_array()) {
      throw DataError(ErrorCode::kMalformed, "scene.classes: expected an array");
    }
    s.classes.clear();
    for (std::size_t k = 0; k < j["classes"].size(); ++k) {
      s.classes.push_back(parse_scene_class(
          j["classes"][k], "scene.classes[" + std::to_string(k) + "]"));
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (num_scenes < 1) {
    throw DataError(ErrorCode::kInvalidArgument, "num_scenes must be >= 1");
  }
  if (threads < 1) {
    throw DataError(ErrorCode::kInvalidArgument, "threads must be >= 1");
  }
  scene.validate();
  heatmap.validate();
  fusion.validate();
  oracle.validate();
  crf.validate();
  if (!(fovea.win_frac_w > 0 && fovea.win_frac_w <= 1 && fovea.win_frac_h > 0 &&
        fovea.win_frac_h <= 1 && fovea.stride >= 1)) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "fovea: fractions must be in (0, 1] and stride >= 1");
  }
  if (!(metrics.central_frac > 0 && metrics.central_frac < 1)) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "metrics.central_frac must be in (0, 1)");
  }
}

CrfParams parse_crf_params(const json& j, CrfParams base) {
  const std::string where = "crf";
  check_keys(j, {"w1", "w2", "theta_alpha", "theta_beta", "theta_gamma",
                 "iterations", "mu_fallback", "mu_max", "epsilon_mean"},
             where);
  read_field(j, "w1", base.w1, where);
  read_field(j, "w2", base.w2, where);
  read_field(j, "theta_alpha", base.theta_alpha, where);
  read_field(j, "theta_beta", base.theta_beta, where);
  read_field(j, "theta_gamma", base.theta_gamma, where);
  read_field(j, "iterations", base.iterations, where);
  read_field(j, "mu_fallback", base.mu_fallback, where);
  read_field(j, "mu_max", base.mu_max, where);
  read_field(j, "epsilon_mean", base.epsilon_mean, where);
  return base;
}

json to_json(const CrfParams& p) {
  return {{"w1", p.w1},
          {"w2", p.w2},
          {"theta_alpha", p.theta_alpha},
          {"theta_beta", p.theta_beta},
          {"theta_gamma", p.theta_gamma},
          {"iterations", p.iterations},
          {"mu_fallback", p.mu_fallback},
          {"mu_max", p.mu_max},
          {"epsilon_mean", p.epsilon_mean}};
}

std::vector<CrfParams> expand_param_grid(const json& j, const CrfParams& base) {
  require_object(j, "grid");
  std::vector<CrfParams> grid;
  if (j.contains("points")) {
    check_keys(j, {"points"}, "grid");
    if (!j["points"].is_array()) {
      throw DataError(ErrorCode::kMalformed, "grid.points: expected an array");
    }
    for (const json& p : j["points"]) grid.push_back(parse_crf_params(p, base));
  } else {
    static constexpr const char* kOrder[] = {
        "w1",     "w2",          "theta_alpha", "theta_beta",  "theta_gamma",
        "iterations", "mu_fallback", "mu_max",  "epsilon_mean"};
    check_keys(j, {"w1", "w2", "theta_alpha", "theta_beta", "theta_gamma",
                   "iterations", "mu_fallback", "mu_max", "epsilon_mean"},
               "grid");
    grid.push_back(base);
    for (const char* key : kOrder) {
      if (!j.contains(key)) continue;
      if (!j[key].is_array() || j[key].empty()) {
        throw DataError(ErrorCode::kMalformed,
                        std::string("grid.") + key + ": expected a non-empty array");
      }
      std::vector<CrfParams> next;
      for (const CrfParams& g : grid) {
        for (const json& v : j[key]) {
          next.push_back(parse_crf_params(json{{key, v}}, g));
        }
      }
      grid = std::move(next);
    }
  }
  if (grid.empty()) {
    throw DataError(ErrorCode::kInvalidArgument, "grid: no parameter points");
  }
  for (const CrfParams& p : grid) p.validate();
  return grid;
}

RunConfig parse_run_config(const json& j) {
  check_keys(j, {"seed", "num_scenes", "threads", "scene", "heatmap", "fovea",
                 "fusion", "oracle", "crf", "metrics"},
             "config");
  RunConfig cfg;
  read_field(j, "seed", cfg.seed, "config");
  read_field(j, "num_scenes", cfg.num_scenes, "config");
  read_field(j, "threads", cfg.threads, "config");
  if (j.contains("scene")) parse_scene(j["scene"], cfg.scene);
  if (j.contains("heatmap")) {
    const json& h = j["heatmap"];
    check_keys(h, {"delta", "background_value"}, "heatmap");
    read_field(h, "delta", cfg.heatmap.delta, "heatmap");
    read_field(h, "background_value", cfg.heatmap.background_value, "heatmap");
  }
  if (j.contains("fovea")) {
    const json& f = j["fovea"];
    check_keys(f, {"win_frac_w", "win_frac_h", "stride"}, "fovea");
    read_field(f, "win_frac_w", cfg.fovea.win_frac_w, "fovea");
    read_field(f, "win_frac_h", cfg.fovea.win_frac_h, "fovea");
    read_field(f, "stride", cfg.fovea.stride, "fovea");
  }
  if (j.contains("fusion")) {
    const json& f = j["fusion"];
    check_keys(f, {"mode", "upscale_factor", "resample", "image_resample"},
               "fusion");
    std::string mode{to_string(cfg.fusion.mode)};
    std::string resample{to_string(cfg.fusion.resample)};
    std::string image_resample{to_string(cfg.fusion.image_resample)};
    read_field(f, "mode", mode, "fusion");
    read_field(f, "resample", resample, "fusion");
    read_field(f, "image_resample", image_resample, "fusion");
    read_field(f, "upscale_factor", cfg.fusion.upscale_factor, "fusion");
    cfg.fusion.mode = parse_fusion_mode(mode);
    cfg.fusion.resample = parse_resample(resample);
    cfg.fusion.image_resample = parse_resample(image_resample);
  }
  if (j.contains("oracle")) {
    const json& o = j["oracle"];
    check_keys(o, {"rho_max", "area_ref", "breakdown_area", "breakdown_frac",
                   "margin", "noise"},
               "oracle");
    read_field(o, "rho_max", cfg.oracle.rho_max, "oracle");
    read_field(o, "area_ref", cfg.oracle.area_ref, "oracle");
    read_field(o, "breakdown_area", cfg.oracle.breakdown_area, "oracle");
    read_field(o, "breakdown_frac", cfg.oracle.breakdown_frac, "oracle");
    read_field(o, "margin", cfg.oracle.margin, "oracle");
    read_field(o, "noise", cfg.oracle.noise, "oracle");
  }
  if (j.contains("crf")) cfg.crf = parse_crf_params(j["crf"], cfg.crf);
  if (j.contains("metrics")) {
    const json& m = j["metrics"];
    check_keys(m, {"region", "central_frac"}, "metrics");
    std::string region{to_string(cfg.metrics.region)};
    read_field(m, "region", region, "metrics");
    cfg.metrics.region = parse_region_kind(region);
    read_field(m, "central_frac", cfg.metrics.central_frac, "metrics");
  }
  return cfg;
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(ErrorCode::kMalformed,
                    path.string() + ": invalid JSON: " + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return parse_run_config(read_json(path));
  } catch (const DataError& e) {
    throw DataError(e.code(), path.string() + ": " + e.what());
  }
}

json to_json(const RunConfig& cfg) {
  json classes = json::array();
  for (const SceneClass& c : cfg.scene.classes) {
    classes.push_back({{"id", c.id},
                       {"name", c.name},
                       {"category", c.category},
                       {"color", {c.color[0], c.color[1], c.color[2]}},
                       {"real_size", {c.real_width, c.real_height}},
                       {"confusable", c.confusable_id}});
  }
  return {
      {"seed", cfg.seed},
      {"num_scenes", cfg.num_scenes},
      {"threads", cfg.threads},
      {"scene",
       {{"width", cfg.scene.width},
        {"height", cfg.scene.height},
        {"vanishing_point", {cfg.scene.vanishing_x, cfg.scene.vanishing_y}},
        {"num_objects", cfg.scene.num_objects},
        {"depth_range", {cfg.scene.depth_min, cfg.scene.depth_max}},
        {"ray_scale", cfg.scene.ray_scale},
        {"color_noise", cfg.scene.color_noise},
        {"background_id", cfg.scene.background_id},
        {"classes", classes}}},
      {"heatmap",
       {{"delta", cfg.heatmap.delta},
        {"background_value", cfg.heatmap.background_value}}},
      {"fovea",
       {{"win_frac_w", cfg.fovea.win_frac_w},
        {"win_frac_h", cfg.fovea.win_frac_h},
        {"stride", cfg.fovea.stride}}},
      {"fusion",
       {{"mode", to_string(cfg.fusion.mode)},
        {"upscale_factor", cfg.fusion.upscale_factor},
        {"resample", to_string(cfg.fusion.resample)},
        {"image_resample", to_string(cfg.fusion.image_resample)}}},
      {"oracle",
       {{"rho_max", cfg.oracle.rho_max},
        {"area_ref", cfg.oracle.area_ref},
        {"breakdown_area", cfg.oracle.breakdown_area},
        {"breakdown_frac", cfg.oracle.breakdown_frac},
        {"margin", cfg.oracle.margin},
        {"noise", cfg.oracle.noise}}},
      {"crf", to_json(cfg.crf)},
      {"metrics",
       {{"region", to_string(cfg.metrics.region)},
        {"central_frac", cfg.metrics.central_frac}}},
  };
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t index) {
  auto mix = [](std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

}  // namespace fovea::cli
