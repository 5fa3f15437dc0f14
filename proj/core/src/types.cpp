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

#include "fovea/types.hpp"

#include <algorithm>
#include <set>

namespace fovea {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformedHeader: return "malformed header";
    case ErrorCode::kZeroDimension: return "zero dimension";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kUnsupportedMaxval: return "unsupported maxval";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kBadRank: return "bad rank";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kUnknownClass: return "unknown class";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kMissingAverageSize: return "missing average size";
    case ErrorCode::kZeroArea: return "zero area";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kTooLarge: return "too large";
    case ErrorCode::kClassifier: return "classifier";
  }
  return "unknown";
}

InstancePainter::InstancePainter(int width, int height)
    : owner_(width, height, 1, -1) {}

int InstancePainter::paint(int class_id, std::span<const PixelRun> runs) {
  const int idx = static_cast<int>(classes_.size());
  classes_.push_back(class_id);
  for (const PixelRun& run : runs) {
    if (run.y < 0 || run.y >= owner_.height()) continue;
    const int xb = std::max(run.x_begin, 0);
    const int xe = std::min(run.x_end, owner_.width());
    for (int x = xb; x < xe; ++x) owner_.at(x, run.y) = idx;
  }
  return idx;
}

int InstancePainter::paint_rect(int class_id, int x0, int y0, int x1, int y1) {
  std::vector<PixelRun> runs;
  for (int y = y0; y < y1; ++y) runs.push_back({y, x0, x1});
  return paint(class_id, runs);
}

InstanceSet InstancePainter::finish() const {
  InstanceSet set;
  set.width = owner_.width();
  set.height = owner_.height();
  set.instances.resize(classes_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    set.instances[i].class_id = classes_[i];
  }
  for (int y = 0; y < owner_.height(); ++y) {
    int x = 0;
    while (x < owner_.width()) {
      const int id = owner_.at(x, y);
      int end = x + 1;
      while (end < owner_.width() && owner_.at(end, y) == id) ++end;
      if (id >= 0) {
        Instance& inst = set.instances[static_cast<std::size_t>(id)];
        inst.runs.push_back({y, x, end});
        inst.area += end - x;
      }
      x = end;
    }
  }
  return set;
}

Grid<std::int32_t> instance_index_map(const InstanceSet& set) {
  Grid<std::int32_t> index(set.width, set.height, 1, -1);
  for (std::size_t i = 0; i < set.instances.size(); ++i) {
    for (const PixelRun& run : set.instances[i].runs) {
      for (int x = run.x_begin; x < run.x_end; ++x) {
        index.at(x, run.y) = static_cast<std::int32_t>(i);
      }
    }
  }
  return index;
}

ClassTable::ClassTable(std::vector<ClassInfo> classes)
    : classes_(std::move(classes)) {
  std::set<int> ids;
  for (const ClassInfo& c : classes_) {
    if (c.id < 0 || c.id >= kIgnoreLabel) {
      throw DataError(ErrorCode::kOutOfRange,
                      "class id out of range: " + std::to_string(c.id));
    }
    if (!ids.insert(c.id).second) {
      throw DataError(ErrorCode::kMalformed,
                      "duplicate class id: " + std::to_string(c.id));
    }
    if (c.category.empty()) {
      throw DataError(ErrorCode::kMalformed,
                      "class '" + c.name + "' has an empty category");
    }
    if (c.avg_size && !(*c.avg_size > 0.0)) {
      throw DataError(ErrorCode::kOutOfRange,
                      "class '" + c.name + "' avg_size must be positive");
    }
  }
}

const ClassInfo* ClassTable::find(int id) const {
  auto it = std::find_if(classes_.begin(), classes_.end(),
                         [id](const ClassInfo& c) { return c.id == id; });
  return it == classes_.end() ? nullptr : &*it;
}

ClassInfo* ClassTable::find(int id) {
  auto it = std::find_if(classes_.begin(), classes_.end(),
                         [id](const ClassInfo& c) { return c.id == id; });
  return it == classes_.end() ? nullptr : &*it;
}

const ClassInfo* ClassTable::find_by_name(const std::string& name) const {
  auto it = std::find_if(classes_.begin(), classes_.end(),
                         [&](const ClassInfo& c) { return c.name == name; });
  return it == classes_.end() ? nullptr : &*it;
}

int ClassTable::num_labels() const {
  int n = 0;
  for (const ClassInfo& c : classes_) n = std::max(n, c.id + 1);
  return n;
}

std::vector<std::string> ClassTable::categories() const {
  std::vector<std::string> out;
  for (const ClassInfo& c : classes_) {
    if (std::find(out.begin(), out.end(), c.category) == out.end()) {
      out.push_back(c.category);
    }
  }
  return out;
}

}  // namespace fovea
