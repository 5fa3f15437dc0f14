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

#include "fovea/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fovea {
namespace {

std::optional<double> ratio(double num, double den) {
  if (den <= 0.0) return std::nullopt;
  return num / den;
}

MetricTable finish(std::vector<MetricEntry> entries) {
  MetricTable table{std::move(entries), std::nullopt};
  double sum = 0.0;
  int n = 0;
  for (const MetricEntry& e : table.entries) {
    if (e.value) {
      sum += *e.value;
      ++n;
    }
  }
  if (n > 0) table.mean = sum / n;
  return table;
}

}  // namespace

RegionMask full_mask(int width, int height) {
  return {Grid<std::uint8_t>(width, height, 1, 1), RegionKind::kFull};
}

RegionMask make_region_mask(int width, int height, RegionKind kind,
                            double central_frac) {
  if (kind == RegionKind::kFull) return full_mask(width, height);
  if (!(central_frac > 0.0 && central_frac < 1.0)) {
    throw DataError(ErrorCode::kInvalidArgument,
                    "central_frac must be in (0, 1)");
  }
  auto margin = [&](int dim) {
    const int m = static_cast<int>(std::floor((1.0 - central_frac) * dim / 2.0 + 0.5));
    return std::clamp(m, 0, (dim - 1) / 2);
  };
  const int mx = margin(width);
  const int my = margin(height);
  const std::uint8_t central_value = kind == RegionKind::kCentral ? 1 : 0;
  RegionMask mask{Grid<std::uint8_t>(width, height, 1,
                                     static_cast<std::uint8_t>(1 - central_value)),
                  kind};
  for (int y = my; y < height - my; ++y) {
    for (int x = mx; x < width - mx; ++x) mask.inside.at(x, y) = central_value;
  }
  return mask;
}

ConfusionAccumulator::ConfusionAccumulator(const ClassTable& table)
    : table_(table) {
  for (const ClassInfo& c : table.classes()) {
    if (c.evaluable) ids_.push_back(c.id);
  }
  slot_of_label_.assign(static_cast<std::size_t>(table.num_labels()), -1);
  for (std::size_t s = 0; s < ids_.size(); ++s) {
    slot_of_label_[static_cast<std::size_t>(ids_[s])] = static_cast<int>(s);
  }
  const std::size_t k = ids_.size();
  confusion_.assign(k * (k + 1), 0);
  weighted_.assign(k * (k + 1), 0.0);
}

int ConfusionAccumulator::slot(int label) const {
  if (label < 0 || label >= static_cast<int>(slot_of_label_.size())) return -1;
  return slot_of_label_[static_cast<std::size_t>(label)];
}

bool ConfusionAccumulator::instance_bearing(int class_id) const {
  const ClassInfo* c = table_.find(class_id);
  return c != nullptr && c->avg_size.has_value();
}

void ConfusionAccumulator::add(const LabelMap& pred, const LabelMap& gt,
                               const InstanceSet& instances,
                               const RegionMask& mask) {
  if (!pred.same_size(gt) || !mask.inside.same_size(gt)) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "prediction, ground truth and region mask sizes differ");
  }
  const bool has_instances = !instances.instances.empty();
  if (has_instances &&
      (instances.width != gt.width() || instances.height != gt.height())) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "instance annotations do not match the ground truth size");
  }
  Grid<std::int32_t> owner;
  std::vector<double> instance_weight;
  if (has_instances) {
    owner = instance_index_map(instances);
    instance_weight.resize(instances.instances.size(), 1.0);
  }
  std::vector<bool> weight_ready(instance_weight.size(), false);

  const std::size_t cols = ids_.size() + 1;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (mask.inside.values()[i] == 0) continue;
    const int g = slot(gt.values()[i]);
    if (g < 0) continue;
    int p = slot(pred.values()[i]);
    if (p < 0) p = static_cast<int>(ids_.size());
    double w = 1.0;
    if (has_instances) {
      const std::int32_t m = owner.values()[i];
      if (m >= 0) {
        const auto mi = static_cast<std::size_t>(m);
        if (!weight_ready[mi]) {
          const Instance& inst = instances.instances[mi];
          const ClassInfo* info = table_.find(inst.class_id);
          if (info == nullptr || !info->avg_size) {
            throw DataError(ErrorCode::kMissingAverageSize,
                            "instance " + std::to_string(m) + " of class " +
                                std::to_string(inst.class_id) +
                                " has no class average size");
          }
          instance_weight[mi] = *info->avg_size / static_cast<double>(inst.area);
          weight_ready[mi] = true;
        }
        w = instance_weight[mi];
      }
    }
    const std::size_t cell = static_cast<std::size_t>(g) * cols +
                             static_cast<std::size_t>(p);
    confusion_[cell] += 1;
    weighted_[cell] += w;
  }
}

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
  if (other.ids_ != ids_) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "cannot merge accumulators over different class tables");
  }
  for (std::size_t i = 0; i < confusion_.size(); ++i) {
    confusion_[i] += other.confusion_[i];
    weighted_[i] += other.weighted_[i];
  }
}

ClassCounts ConfusionAccumulator::class_counts(int class_id) const {
  const int s = slot(class_id);
  if (s < 0) {
    throw DataError(ErrorCode::kUnknownClass,
                    "class " + std::to_string(class_id) + " is not evaluable");
  }
  const std::size_t k = ids_.size();
  const std::size_t cols = k + 1;
  const auto su = static_cast<std::size_t>(s);
  ClassCounts c;
  for (std::size_t p = 0; p < cols; ++p) {
    const std::size_t cell = su * cols + p;
    if (p == su) {
      c.tp = confusion_[cell];
      c.itp = weighted_[cell];
    } else {
      c.fn += confusion_[cell];
      c.ifn += weighted_[cell];
    }
  }
  for (std::size_t g = 0; g < k; ++g) {
    if (g != su) c.fp += confusion_[g * cols + su];
  }
  return c;
}

ClassCounts ConfusionAccumulator::category_counts(
    const std::string& category) const {
  const std::size_t k = ids_.size();
  const std::size_t cols = k + 1;
  std::vector<bool> member(cols, false);
  for (std::size_t s = 0; s < k; ++s) {
    member[s] = table_.find(ids_[s])->category == category;
  }
  ClassCounts c;
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t p = 0; p < cols; ++p) {
      const std::size_t cell = g * cols + p;
      if (member[g] && member[p]) {
        c.tp += confusion_[cell];
        c.itp += weighted_[cell];
      } else if (member[g]) {
        c.fn += confusion_[cell];
        c.ifn += weighted_[cell];
      } else if (member[p]) {
        c.fp += confusion_[cell];
      }
    }
  }
  return c;
}

void accumulate(const LabelMap& pred, const LabelMap& gt,
                const InstanceSet& instances, const ClassTable& table,
                const RegionMask& mask, ConfusionAccumulator& acc) {
  if (acc.table().classes().size() != table.classes().size()) {
    throw DataError(ErrorCode::kDimensionMismatch,
                    "accumulator was built for a different class table");
  }
  acc.add(pred, gt, instances, mask);
}

namespace {

std::vector<std::string> evaluable_categories(const ConfusionAccumulator& acc,
                                              bool instance_only) {
  std::vector<std::string> cats;
  for (int id : acc.evaluable_ids()) {
    if (instance_only && !acc.instance_bearing(id)) continue;
    const std::string& cat = acc.table().find(id)->category;
    if (std::find(cats.begin(), cats.end(), cat) == cats.end()) {
      cats.push_back(cat);
    }
  }
  return cats;
}

std::optional<double> iou_of(const ClassCounts& c) {
  return ratio(static_cast<double>(c.tp),
               static_cast<double>(c.tp + c.fp + c.fn));
}

std::optional<double> iiou_of(const ClassCounts& c) {
  if (c.tp + c.fp + c.fn == 0) return std::nullopt;
  return ratio(c.itp, c.itp + static_cast<double>(c.fp) + c.ifn);
}

}  // namespace

MetricTable iou(const ConfusionAccumulator& acc, Level level) {
  std::vector<MetricEntry> entries;
  if (level == Level::kClass) {
    for (int id : acc.evaluable_ids()) {
      entries.push_back({acc.table().find(id)->name, iou_of(acc.class_counts(id))});
    }
  } else {
    for (const std::string& cat : evaluable_categories(acc, false)) {
      entries.push_back({cat, iou_of(acc.category_counts(cat))});
    }
  }
  return finish(std::move(entries));
}

MetricTable iiou(const ConfusionAccumulator& acc, Level level) {
  std::vector<MetricEntry> entries;
  if (level == Level::kClass) {
    for (int id : acc.evaluable_ids()) {
      if (!acc.instance_bearing(id)) continue;
      entries.push_back({acc.table().find(id)->name, iiou_of(acc.class_counts(id))});
    }
  } else {
    for (const std::string& cat : evaluable_categories(acc, true)) {
      entries.push_back({cat, iiou_of(acc.category_counts(cat))});
    }
  }
  return finish(std::move(entries));
}

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::kFull: return "full";
    case RegionKind::kPeripheral: return "peripheral";
    case RegionKind::kCentral: return "central";
  }
  return "full";
}

RegionKind parse_region_kind(std::string_view name) {
  if (name == "full") return RegionKind::kFull;
  if (name == "peripheral") return RegionKind::kPeripheral;
  if (name == "central") return RegionKind::kCentral;
  throw DataError(ErrorCode::kInvalidArgument,
                  "unknown region kind '" + std::string(name) + "'");
}

}  // namespace fovea
