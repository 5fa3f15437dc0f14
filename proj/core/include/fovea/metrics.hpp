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

// Cityscapes-style evaluation.
//
// IoU = TP / (TP + FP + FN) per class or per category. The instance-weighted
// iIoU = iTP / (iTP + FP + iFN) scales each ground-truth pixel of an
// instance by avg_size(class) / area(instance); pixels of instance-bearing
// classes outside any instance weigh 1 and false positives stay unweighted.
// A class is instance-bearing when the class table gives it an avg_size.

#ifndef FOVEA_METRICS_HPP_
#define FOVEA_METRICS_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fovea/types.hpp"

namespace fovea {

enum class RegionKind { kFull, kPeripheral, kCentral };

struct RegionMask {
  Grid<std::uint8_t> inside;
  RegionKind kind = RegionKind::kFull;
};

RegionMask full_mask(int width, int height);

/// The central region is the axis-centered rectangle obtained by removing a
/// margin of floor((1 - central_frac) * dim / 2 + 0.5) pixels from each side
/// (at least one pixel stays central). Peripheral is its complement.
RegionMask make_region_mask(int width, int height, RegionKind kind,
                            double central_frac = 0.5);

struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double itp = 0.0;
  double ifn = 0.0;
};

/// Gathers a confusion matrix over the evaluable classes of a table, plus
/// its instance-weighted counterpart. Ground-truth pixels that are ignore
/// or belong to non-evaluable classes are skipped; predictions outside the
/// evaluable set count as misses.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(const ClassTable& table);

  void add(const LabelMap& pred, const LabelMap& gt,
           const InstanceSet& instances, const RegionMask& mask);
  void merge(const ConfusionAccumulator& other);

  /// Counts for an evaluable class id.
  ClassCounts class_counts(int class_id) const;
  /// Counts after mapping classes to categories.
  ClassCounts category_counts(const std::string& category) const;

  const ClassTable& table() const { return table_; }
  const std::vector<int>& evaluable_ids() const { return ids_; }
  bool instance_bearing(int class_id) const;

  friend bool operator==(const ConfusionAccumulator&,
                         const ConfusionAccumulator&) = default;

 private:
  int slot(int label) const;  // -1 when not evaluable

  ClassTable table_;
  std::vector<int> ids_;
  std::vector<int> slot_of_label_;
  // (K + 1) x (K + 1); the extra column collects non-evaluable predictions.
  std::vector<std::int64_t> confusion_;
  std::vector<double> weighted_;
};

void accumulate(const LabelMap& pred, const LabelMap& gt,
                const InstanceSet& instances, const ClassTable& table,
                const RegionMask& mask, ConfusionAccumulator& acc);

enum class Level { kClass, kCategory };

struct MetricEntry {
  std::string name;
  /// Empty when the class never occurs (TP + FP + FN == 0).
  std::optional<double> value;
};

struct MetricTable {
  std::vector<MetricEntry> entries;
  /// Mean over entries with a value; empty when there are none.
  std::optional<double> mean;
};

MetricTable iou(const ConfusionAccumulator& acc, Level level);
/// Reported for instance-bearing classes (or categories containing one).
MetricTable iiou(const ConfusionAccumulator& acc, Level level);

std::string_view to_string(RegionKind kind);
RegionKind parse_region_kind(std::string_view name);

}  // namespace fovea

#endif  // FOVEA_METRICS_HPP_
