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

#include "fovea/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "fovea/log.hpp"

namespace fovea {
namespace {

using Bytes = std::vector<unsigned char>;
using nlohmann::json;

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(ErrorCode::kIo, "cannot open " + path.string());
  }
  Bytes bytes((std::istreambuf_iterator<char>(in)),
              std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw DataError(ErrorCode::kIo, "read failed: " + path.string());
  }
  return bytes;
}

void write_bytes(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError(ErrorCode::kIo, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) {
    throw DataError(ErrorCode::kIo, "write failed: " + path.string());
  }
}

// Netpbm header: magic, then whitespace-separated decimal fields with '#'
// comments, then exactly one whitespace byte before the payload.
struct PnmHeader {
  int width = 0;
  int height = 0;
  long maxval = 0;
  std::size_t payload_offset = 0;
};

PnmHeader parse_pnm_header(const Bytes& bytes, std::string_view magic,
                           const std::filesystem::path& path) {
  const std::string where = path.string();
  if (bytes.size() < 2 || bytes[0] != magic[0] || bytes[1] != magic[1]) {
    throw DataError(ErrorCode::kMalformedHeader,
                    where + ": expected magic " + std::string(magic));
  }
  std::size_t pos = 2;
  auto next_field = [&](const char* name) -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw DataError(ErrorCode::kMalformedHeader,
                      where + ": bad or missing " + name);
    }
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (1L << 30)) {
        throw DataError(ErrorCode::kMalformedHeader,
                        where + ": " + name + " too large");
      }
      ++pos;
    }
    return value;
  };
  PnmHeader h;
  const long w = next_field("width");
  const long ht = next_field("height");
  h.maxval = next_field("maxval");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw DataError(ErrorCode::kMalformedHeader,
                    where + ": missing separator after maxval");
  }
  if (w == 0 || ht == 0) {
    throw DataError(ErrorCode::kZeroDimension, where + ": zero dimension");
  }
  h.width = static_cast<int>(w);
  h.height = static_cast<int>(ht);
  h.payload_offset = pos + 1;
  return h;
}

void append_ascii(Bytes& out, const std::string& s) {
  out.insert(out.end(), s.begin(), s.end());
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

std::uint32_t get_u32(const Bytes& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{in[pos + i]} << (8 * i);
  return v;
}

template <typename GridT>
void write_fvt1(const GridT& grid, std::vector<std::uint32_t> dims,
                const std::filesystem::path& path) {
  Bytes out;
  out.reserve(8 + 4 * dims.size() + 4 * grid.values().size());
  append_ascii(out, "FVT1");
  put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (std::uint32_t d : dims) put_u32(out, d);
  for (float v : grid.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  write_bytes(path, out);
}

json parse_json_file(const std::filesystem::path& path) {
  Bytes bytes = read_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw DataError(ErrorCode::kMalformed,
                    path.string() + ": invalid JSON: " + e.what());
  }
}

template <typename T>
T json_get(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw DataError(ErrorCode::kMalformed,
                    where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(ErrorCode::kMalformed,
                    where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

LabelMap read_label_map(const std::filesystem::path& path) {
  const Bytes bytes = read_bytes(path);
  const PnmHeader h = parse_pnm_header(bytes, "P5", path);
  if (h.maxval != 65535) {
    throw DataError(ErrorCode::kUnsupportedMaxval,
                    path.string() + ": maxval must be 65535, got " +
                        std::to_string(h.maxval));
  }
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
  if (bytes.size() - h.payload_offset < 2 * count) {
    throw DataError(ErrorCode::kTruncated,
                    path.string() + ": payload shorter than 2*w*h bytes");
  }
  LabelMap map(h.width, h.height);
  const unsigned char* p = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < count; ++i) {
    map.values()[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
  }
  return map;
}

void write_label_map(const LabelMap& map, const std::filesystem::path& path) {
  Bytes out;
  append_ascii(out, "P5\n" + std::to_string(map.width()) + " " +
                        std::to_string(map.height()) + "\n65535\n");
  for (std::uint16_t v : map.values()) {
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v & 0xFF));
  }
  write_bytes(path, out);
}

RgbImage read_image(const std::filesystem::path& path) {
  const Bytes bytes = read_bytes(path);
  const PnmHeader h = parse_pnm_header(bytes, "P6", path);
  if (h.maxval != 255) {
    throw DataError(ErrorCode::kUnsupportedMaxval,
                    path.string() + ": maxval must be 255, got " +
                        std::to_string(h.maxval));
  }
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height * 3;
  if (bytes.size() - h.payload_offset < count) {
    throw DataError(ErrorCode::kTruncated,
                    path.string() + ": payload shorter than 3*w*h bytes");
  }
  RgbImage image(h.width, h.height);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset),
              count, image.values().begin());
  return image;
}

void write_image(const RgbImage& image, const std::filesystem::path& path) {
  Bytes out;
  append_ascii(out, "P6\n" + std::to_string(image.width()) + " " +
                        std::to_string(image.height()) + "\n255\n");
  out.insert(out.end(), image.values().begin(), image.values().end());
  write_bytes(path, out);
}

Tensor read_tensor(const std::filesystem::path& path) {
  const std::string where = path.string();
  const Bytes bytes = read_bytes(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "FVT1", 4) != 0) {
    throw DataError(ErrorCode::kBadMagic, where + ": not an FVT1 tensor");
  }
  if (bytes.size() < 8) {
    throw DataError(ErrorCode::kTruncated, where + ": missing rank");
  }
  const std::uint32_t rank = get_u32(bytes, 4);
  if (rank != 2 && rank != 3) {
    throw DataError(ErrorCode::kBadRank,
                    where + ": rank must be 2 or 3, got " +
                        std::to_string(rank));
  }
  if (bytes.size() < 8 + 4 * rank) {
    throw DataError(ErrorCode::kTruncated, where + ": missing dimensions");
  }
  std::vector<std::uint32_t> dims(rank);
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    dims[i] = get_u32(bytes, 8 + 4 * i);
    if (dims[i] == 0) {
      throw DataError(ErrorCode::kZeroDimension, where + ": zero dimension");
    }
    if (dims[i] > (1u << 30)) {
      throw DataError(ErrorCode::kOutOfRange, where + ": dimension too large");
    }
    count *= dims[i];
  }
  const std::size_t offset = 8 + 4 * rank;
  if ((bytes.size() - offset) / 4 < count) {
    throw DataError(ErrorCode::kTruncated, where + ": payload truncated");
  }
  auto fill = [&](std::vector<float>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const float v = std::bit_cast<float>(get_u32(bytes, offset + 4 * i));
      if (!std::isfinite(v)) {
        throw DataError(ErrorCode::kNonFinite,
                        where + ": non-finite value at element " +
                            std::to_string(i));
      }
      values[i] = v;
    }
  };
  const int height = static_cast<int>(dims[0]);
  const int width = static_cast<int>(dims[1]);
  if (rank == 2) {
    PerspectiveHeatmap heatmap(width, height);
    fill(heatmap.values());
    if (std::any_of(heatmap.values().begin(), heatmap.values().end(),
                    [](float v) { return v < 0.0f; })) {
      throw DataError(ErrorCode::kOutOfRange,
                      where + ": heatmap values must be non-negative");
    }
    return heatmap;
  }
  if (dims[2] < 2) {
    throw DataError(ErrorCode::kBadRank,
                    where + ": score tensor needs at least two labels");
  }
  ScoreMap scores(width, height, static_cast<int>(dims[2]));
  fill(scores.values());
  return scores;
}

PerspectiveHeatmap read_heatmap(const std::filesystem::path& path) {
  Tensor t = read_tensor(path);
  if (auto* h = std::get_if<PerspectiveHeatmap>(&t)) return std::move(*h);
  throw DataError(ErrorCode::kBadRank,
                  path.string() + ": expected a rank-2 heatmap");
}

ScoreMap read_scores(const std::filesystem::path& path) {
  Tensor t = read_tensor(path);
  if (auto* s = std::get_if<ScoreMap>(&t)) return std::move(*s);
  throw DataError(ErrorCode::kBadRank,
                  path.string() + ": expected a rank-3 score tensor");
}

void write_tensor(const PerspectiveHeatmap& heatmap,
                  const std::filesystem::path& path) {
  write_fvt1(heatmap,
             {static_cast<std::uint32_t>(heatmap.height()),
              static_cast<std::uint32_t>(heatmap.width())},
             path);
}

void write_tensor(const ScoreMap& scores, const std::filesystem::path& path) {
  write_fvt1(scores,
             {static_cast<std::uint32_t>(scores.height()),
              static_cast<std::uint32_t>(scores.width()),
              static_cast<std::uint32_t>(scores.num_labels())},
             path);
}

ClassTable read_class_table(const std::filesystem::path& path) {
  const std::string where = path.string();
  const json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("classes") || !j["classes"].is_array()) {
    throw DataError(ErrorCode::kMalformed, where + ": expected {\"classes\":[...]}");
  }
  std::vector<ClassInfo> classes;
  for (const json& c : j["classes"]) {
    ClassInfo info;
    info.id = json_get<int>(c, "id", where);
    info.name = json_get<std::string>(c, "name", where);
    info.category = json_get<std::string>(c, "category", where);
    if (c.contains("avg_size") && !c["avg_size"].is_null()) {
      info.avg_size = json_get<double>(c, "avg_size", where);
    }
    info.evaluable = c.contains("evaluable") ? json_get<bool>(c, "evaluable", where)
                                             : true;
    classes.push_back(std::move(info));
  }
  try {
    return ClassTable(std::move(classes));
  } catch (const DataError& e) {
    throw DataError(e.code(), where + ": " + e.what());
  }
}

void write_class_table(const ClassTable& table,
                       const std::filesystem::path& path) {
  json classes = json::array();
  for (const ClassInfo& c : table.classes()) {
    json entry = {{"id", c.id},
                  {"name", c.name},
                  {"category", c.category},
                  {"avg_size", nullptr},
                  {"evaluable", c.evaluable}};
    if (c.avg_size) entry["avg_size"] = *c.avg_size;
    classes.push_back(std::move(entry));
  }
  write_text(path, json{{"classes", classes}}.dump(2) + "\n");
}

std::vector<PixelRun> rasterize_polygon(
    const std::vector<std::pair<double, double>>& polygon, int width,
    int height) {
  std::vector<PixelRun> runs;
  if (polygon.size() < 3) return runs;
  double ymin = polygon[0].second;
  double ymax = polygon[0].second;
  for (const auto& [x, y] : polygon) {
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const int row_begin = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int row_end = std::min(height, static_cast<int>(std::ceil(ymax)) + 1);
  std::vector<double> xs;
  for (int y = row_begin; y < row_end; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < polygon.size(); ++i) {
      const auto& [ax, ay] = polygon[i];
      const auto& [bx, by] = polygon[(i + 1) % polygon.size()];
      // Half-open in y so shared vertices are counted once.
      if ((ay <= yc && yc < by) || (by <= yc && yc < ay)) {
        xs.push_back(ax + (yc - ay) * (bx - ax) / (by - ay));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel x is inside when its center x + 0.5 lies in [xa, xb).
      int xb = static_cast<int>(std::ceil(xs[k] - 0.5));
      int xe = static_cast<int>(std::ceil(xs[k + 1] - 0.5));
      xb = std::max(xb, 0);
      xe = std::min(xe, width);
      if (xe > xb) runs.push_back({y, xb, xe});
    }
  }
  return runs;
}

InstanceSet ingest_polygon_annotations(const std::filesystem::path& path,
                                       const ClassTable& table, int width,
                                       int height,
                                       std::vector<std::string>* warnings) {
  const std::string where = path.string();
  const json j = parse_json_file(path);
  const int file_w = json_get<int>(j, "width", where);
  const int file_h = json_get<int>(j, "height", where);
  if (file_w != width || file_h != height) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    where + ": annotation size " + std::to_string(file_w) +
                        "x" + std::to_string(file_h) + " != image size " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  if (!j.contains("objects") || !j["objects"].is_array()) {
    throw DataError(ErrorCode::kMalformed, where + ": missing objects array");
  }
  InstancePainter painter(width, height);
  int index = 0;
  for (const json& obj : j["objects"]) {
    const std::string obj_where = where + ": objects[" + std::to_string(index++) + "]";
    const auto label = json_get<std::string>(obj, "label", obj_where);
    const ClassInfo* info = table.find_by_name(label);
    if (info == nullptr) {
      throw DataError(ErrorCode::kUnknownClass,
                      obj_where + ": unknown class '" + label + "'");
    }
    if (!obj.contains("polygon") || !obj["polygon"].is_array()) {
      throw DataError(ErrorCode::kMalformed, obj_where + ": missing polygon");
    }
    std::vector<std::pair<double, double>> polygon;
    for (const json& v : obj["polygon"]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
          !v[1].is_number()) {
        throw DataError(ErrorCode::kMalformed,
                        obj_where + ": vertices must be [x, y] pairs");
      }
      polygon.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    if (polygon.size() < 3) {
      throw DataError(ErrorCode::kMalformed,
                      obj_where + ": polygon needs at least 3 vertices");
    }
    const std::vector<PixelRun> runs = rasterize_polygon(polygon, width, height);
    if (runs.empty()) {
      const std::string msg = obj_where + ": polygon outside image, skipped";
      log().warn("{}", msg);
      if (warnings) warnings->push_back(msg);
      continue;
    }
    painter.paint(info->id, runs);
  }
  return painter.finish();
}

void write_polygon_annotations(const std::vector<AnnotationObject>& objects,
                               int width, int height,
                               const std::filesystem::path& path) {
  json objs = json::array();
  for (const AnnotationObject& o : objects) {
    json poly = json::array();
    for (const auto& [x, y] : o.polygon) poly.push_back({x, y});
    objs.push_back({{"label", o.label}, {"polygon", poly}});
  }
  write_text(path,
             json{{"width", width}, {"height", height}, {"objects", objs}}.dump(2) +
                 "\n");
}

std::vector<DetectionBox> read_boxes(const std::filesystem::path& path,
                                     int width, int height,
                                     std::vector<std::string>* warnings) {
  const std::string where = path.string();
  const json j = parse_json_file(path);
  if (!j.is_array()) {
    throw DataError(ErrorCode::kMalformed, where + ": expected a JSON array");
  }
  std::vector<DetectionBox> boxes;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string bw = where + ": [" + std::to_string(i) + "]";
    const double x0 = json_get<double>(j[i], "x0", bw);
    const double y0 = json_get<double>(j[i], "y0", bw);
    const double x1 = json_get<double>(j[i], "x1", bw);
    const double y1 = json_get<double>(j[i], "y1", bw);
    const double score = json_get<double>(j[i], "score", bw);
    const int class_id = json_get<int>(j[i], "class_id", bw);
    if (!(score >= 0.0 && score <= 1.0)) {
      throw DataError(ErrorCode::kOutOfRange, bw + ": score outside [0,1]");
    }
    if (!(x1 > x0) || !(y1 > y0)) {
      throw DataError(ErrorCode::kMalformed, bw + ": requires x0<x1 and y0<y1");
    }
    // Fractional coordinates expand to the covering pixel range.
    DetectionBox box;
    box.x0 = static_cast<int>(std::clamp(std::floor(x0), 0.0, double(width)));
    box.y0 = static_cast<int>(std::clamp(std::floor(y0), 0.0, double(height)));
    box.x1 = static_cast<int>(std::clamp(std::ceil(x1), 0.0, double(width)));
    box.y1 = static_cast<int>(std::clamp(std::ceil(y1), 0.0, double(height)));
    box.score = score;
    box.class_id = class_id;
    if (box.x1 <= box.x0 || box.y1 <= box.y0) {
      const std::string msg = bw + ": box outside image, dropped";
      log().warn("{}", msg);
      if (warnings) warnings->push_back(msg);
      continue;
    }
    boxes.push_back(box);
  }
  return boxes;
}

void write_boxes(const std::vector<DetectionBox>& boxes,
                 const std::filesystem::path& path) {
  json arr = json::array();
  for (const DetectionBox& b : boxes) {
    arr.push_back({{"x0", b.x0},
                   {"y0", b.y0},
                   {"x1", b.x1},
                   {"y1", b.y1},
                   {"score", b.score},
                   {"class_id", b.class_id}});
  }
  write_text(path, arr.dump(2) + "\n");
}

void validate_labels(const LabelMap& map, const ClassTable& table) {
  for (std::size_t i = 0; i < map.values().size(); ++i) {
    const std::uint16_t v = map.values()[i];
    if (v != kIgnoreLabel && !table.contains(v)) {
      throw DataError(ErrorCode::kUnknownClass,
                      "label " + std::to_string(v) + " at pixel " +
                          std::to_string(i) + " is not in the class table");
    }
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, Bytes(text.begin(), text.end()));
}

std::string read_text(const std::filesystem::path& path) {
  const Bytes bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace fovea
