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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "fovea/metrics.hpp"
#include "fovea/perspective.hpp"
#include "fovea/synth.hpp"
#include "support/oracles.hpp"

namespace fovea {
namespace {

// road (stuff), car and bus (vehicle, instance-bearing), sky (not evaluated).
ClassTable micro_table(double car_avg = 4.0, double bus_avg = 6.0) {
  return ClassTable({{0, "road", "flat", std::nullopt, true},
                     {1, "car", "vehicle", car_avg, true},
                     {2, "bus", "vehicle", bus_avg, true},
                     {3, "sky", "sky", std::nullopt, false}});
}

const MetricEntry& entry(const MetricTable& t, const std::string& name) {
  const auto it = std::find_if(t.entries.begin(), t.entries.end(),
                               [&](const MetricEntry& e) { return e.name == name; });
  EXPECT_NE(it, t.entries.end()) << name;
  return *it;
}

TEST(RegionMaskTest, CentralBlockAndComplement) {
  const RegionMask c = make_region_mask(8, 8, RegionKind::kCentral, 0.5);
  const RegionMask p = make_region_mask(8, 8, RegionKind::kPeripheral, 0.5);
  const RegionMask f = make_region_mask(8, 8, RegionKind::kFull);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool inside = x >= 2 && x < 6 && y >= 2 && y < 6;
      EXPECT_EQ(c.inside.at(x, y), inside ? 1 : 0);
      EXPECT_EQ(c.inside.at(x, y) + p.inside.at(x, y), 1);
      EXPECT_EQ(f.inside.at(x, y), 1);
    }
  }
}

TEST(RegionMaskTest, NearlyFullCentralLeavesOnePixelRing) {
  const RegionMask p = make_region_mask(100, 100, RegionKind::kPeripheral, 0.99);
  int count = 0;
  for (std::uint8_t v : p.inside.values()) count += v;
  EXPECT_EQ(count, 100 * 100 - 98 * 98);
  EXPECT_EQ(p.inside.at(0, 50), 1);
  EXPECT_EQ(p.inside.at(1, 50), 0);
  EXPECT_THROW(make_region_mask(8, 8, RegionKind::kCentral, 1.0), DataError);
  EXPECT_THROW(make_region_mask(8, 8, RegionKind::kCentral, 0.0), DataError);
}

TEST(IouTest, CountsFromHandBuiltMaps) {
  // 100 gt pixels of car: 50 hit, 25 missed as road; 25 road predicted car.
  LabelMap gt(25, 6, 0), pred(25, 6, 0);
  for (int i = 0; i < 75; ++i) gt.values()[std::size_t(i)] = 1;
  for (int i = 0; i < 50; ++i) pred.values()[std::size_t(i)] = 1;
  for (int i = 75; i < 100; ++i) pred.values()[std::size_t(i)] = 1;
  ConfusionAccumulator acc(micro_table());
  acc.add(pred, gt, InstanceSet{}, full_mask(25, 6));
  const ClassCounts c = acc.class_counts(1);
  EXPECT_EQ(c.tp, 50);
  EXPECT_EQ(c.fp, 25);
  EXPECT_EQ(c.fn, 25);
  const MetricTable t = iou(acc, Level::kClass);
  EXPECT_DOUBLE_EQ(*entry(t, "car").value, 0.5);
  // bus never occurs: reported empty and left out of the mean.
  EXPECT_FALSE(entry(t, "bus").value.has_value());
  const double road = *entry(t, "road").value;
  EXPECT_DOUBLE_EQ(*t.mean, (road + 0.5) / 2.0);
  EXPECT_THROW(acc.class_counts(3), DataError);
}

TEST(IouTest, PerfectPredictionAndCategoryMerge) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(0, 2);
  LabelMap gt(10, 10);
  for (auto& v : gt.values()) v = std::uint16_t(d(rng));
  ConfusionAccumulator acc(micro_table());
  acc.add(gt, gt, InstanceSet{}, full_mask(10, 10));
  for (const auto& e : iou(acc, Level::kClass).entries) EXPECT_EQ(*e.value, 1.0);
  for (const auto& e : iiou(acc, Level::kClass).entries) EXPECT_EQ(*e.value, 1.0);
  EXPECT_EQ(*entry(iou(acc, Level::kCategory), "vehicle").value, 1.0);
  EXPECT_EQ(acc.class_counts(1).fp, 0);
  EXPECT_EQ(acc.class_counts(1).ifn, 0.0);
}

TEST(IouTest, ConfusionInsideCategoryIsCategoryHit) {
  LabelMap gt(4, 1, 1), pred(4, 1, 2);
  ConfusionAccumulator acc(micro_table());
  acc.add(pred, gt, InstanceSet{}, full_mask(4, 1));
  EXPECT_EQ(*entry(iou(acc, Level::kClass), "car").value, 0.0);
  EXPECT_EQ(*entry(iou(acc, Level::kCategory), "vehicle").value, 1.0);
}

TEST(IouTest, NonEvaluableAndIgnorePixels) {
  LabelMap gt(4, 1, 0), pred(4, 1, 0);
  gt(0, 0) = 3;             // sky gt: skipped
  gt(1, 0) = kIgnoreLabel;  // skipped
  pred(1, 0) = 1;
  pred(2, 0) = 3;  // road predicted as sky: a road FN, nobody's FP
  ConfusionAccumulator acc(micro_table());
  acc.add(pred, gt, InstanceSet{}, full_mask(4, 1));
  const ClassCounts road = acc.class_counts(0);
  EXPECT_EQ(road.tp, 1);
  EXPECT_EQ(road.fn, 1);
  EXPECT_EQ(acc.class_counts(1).fp, 0);
  const MetricTable t = iou(acc, Level::kClass);
  EXPECT_EQ(t.entries.size(), 3u);
}

TEST(IiouTest, HalfAverageInstanceMissedWeighsTwo) {
  InstancePainter paint(4, 1);
  paint.paint_rect(1, 0, 0, 2, 1);  // car of area 2, average 4
  const InstanceSet inst = paint.finish();
  LabelMap gt(4, 1, 0);
  gt(0, 0) = gt(1, 0) = 1;
  ConfusionAccumulator acc(micro_table());
  acc.add(LabelMap(4, 1, 0), gt, inst, full_mask(4, 1));
  const ClassCounts c = acc.class_counts(1);
  EXPECT_EQ(c.fn, 2);
  EXPECT_DOUBLE_EQ(c.ifn, 4.0);
  EXPECT_EQ(*entry(iiou(acc, Level::kClass), "car").value, 0.0);
}

TEST(IiouTest, ThreeInstanceMicroScene) {
  // car A: area 2 (w 2), car B: area 8 (w 0.5), bus C: area 3 (w 2).
  // One stray car gt pixel outside any instance (w 1).
  InstancePainter paint(8, 3);
  paint.paint_rect(1, 0, 0, 2, 1);
  paint.paint_rect(1, 0, 1, 8, 2);
  paint.paint_rect(2, 5, 2, 8, 3);
  const InstanceSet inst = paint.finish();
  LabelMap gt(8, 3, 0);
  gt(0, 0) = gt(1, 0) = 1;
  for (int x = 0; x < 8; ++x) gt(x, 1) = 1;
  gt(5, 2) = gt(6, 2) = gt(7, 2) = 2;
  gt(4, 0) = 1;
  LabelMap pred = gt;
  pred(1, 0) = 0;  // A: one miss
  for (int x = 0; x < 4; ++x) pred(x, 1) = 2;  // B: four missed as bus
  pred(7, 2) = 1;  // C: one miss as car
  pred(2, 2) = 1;  // road predicted car
  ConfusionAccumulator acc(micro_table());
  acc.add(pred, gt, inst, full_mask(8, 3));

  // car: iTP = 2*1 + 0.5*4 + 1 = 5, iFN = 2*1 + 0.5*4 = 4, FP = 2.
  const ClassCounts car = acc.class_counts(1);
  EXPECT_DOUBLE_EQ(car.itp, 5.0);
  EXPECT_DOUBLE_EQ(car.ifn, 4.0);
  EXPECT_EQ(car.fp, 2);
  EXPECT_DOUBLE_EQ(*entry(iiou(acc, Level::kClass), "car").value, 5.0 / 11.0);
  // bus: iTP = 4, iFN = 2, FP = 4.
  EXPECT_DOUBLE_EQ(*entry(iiou(acc, Level::kClass), "bus").value, 4.0 / 10.0);
  // road is not instance-bearing.
  EXPECT_EQ(iiou(acc, Level::kClass).entries.size(), 2u);
  // vehicle: car<->bus confusions are hits; A's miss and road->car remain.
  // iTP = 5 + 2 + 4 + 2 = 13, iFN = 2, FP = 1.
  EXPECT_DOUBLE_EQ(*entry(iiou(acc, Level::kCategory), "vehicle").value, 13.0 / 16.0);
}

TEST(IiouTest, AverageSizedInstancesCollapseToIou) {
  InstancePainter paint(6, 2);
  paint.paint_rect(1, 0, 0, 2, 2);  // area 4
  paint.paint_rect(2, 3, 0, 6, 2);  // area 6
  const InstanceSet inst = paint.finish();
  LabelMap gt(6, 2, 0);
  for (const Instance& m : inst.instances) {
    for (const PixelRun& r : m.runs) {
      for (int x = r.x_begin; x < r.x_end; ++x) gt(x, r.y) = std::uint16_t(m.class_id);
    }
  }
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> d(0, 2);
  LabelMap pred(6, 2);
  for (auto& v : pred.values()) v = std::uint16_t(d(rng));
  ConfusionAccumulator acc(micro_table(4.0, 6.0));
  acc.add(pred, gt, inst, full_mask(6, 2));
  const MetricTable a = iou(acc, Level::kClass), b = iiou(acc, Level::kClass);
  for (const auto& e : b.entries) {
    ASSERT_EQ(e.value.has_value(), entry(a, e.name).value.has_value());
    if (e.value) {
      EXPECT_NEAR(*e.value, *entry(a, e.name).value, 1e-12);
    }
  }
}

TEST(IiouTest, MissingAverageSizeIsError) {
  InstancePainter paint(2, 1);
  paint.paint_rect(1, 0, 0, 1, 1);
  ConfusionAccumulator acc(ClassTable({{0, "road", "flat", std::nullopt, true},
                                       {1, "car", "vehicle", std::nullopt, true}}));
  LabelMap gt(2, 1, 0);
  gt(0, 0) = 1;
  try {
    acc.add(gt, gt, paint.finish(), full_mask(2, 1));
    FAIL() << "expected a throw";
  } catch (const DataError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingAverageSize);
  }
}

struct SceneFixture {
  std::vector<Scene> scenes;
  std::vector<LabelMap> preds;
  ClassTable table;
};

SceneFixture scenes_with_noise(int count, std::uint64_t seed) {
  SceneFixture f;
  SceneSpec spec = SceneSpec::defaults();
  std::vector<InstanceSet> sets;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    spec.rng_seed = seed + std::uint64_t(k);
    f.scenes.push_back(generate_scene(spec));
    sets.push_back(f.scenes.back().instances);
  }
  f.table = compute_average_sizes(sets, scene_class_table(spec));
  std::uniform_int_distribution<int> label(0, f.table.num_labels() - 1);
  std::bernoulli_distribution flip(0.3);
  for (const Scene& s : f.scenes) {
    LabelMap p = s.gt;
    for (auto& v : p.values()) {
      if (flip(rng)) v = std::uint16_t(label(rng));
    }
    f.preds.push_back(p);
  }
  return f;
}

TEST(AccumulatorTest, MatchesNaiveRecountOnSyntheticScenes) {
  const SceneFixture f = scenes_with_noise(3, 70);
  for (RegionKind kind : {RegionKind::kFull, RegionKind::kCentral, RegionKind::kPeripheral}) {
    for (std::size_t k = 0; k < f.scenes.size(); ++k) {
      const Scene& s = f.scenes[k];
      const RegionMask mask = make_region_mask(s.gt.width(), s.gt.height(), kind, 0.5);
      ConfusionAccumulator acc(f.table);
      acc.add(f.preds[k], s.gt, s.instances, mask);
      const auto ref = testing::naive_counts(f.preds[k], s.gt, s.instances, f.table, &mask.inside);
      for (const auto& [id, n] : ref) {
        const ClassCounts c = acc.class_counts(id);
        EXPECT_EQ(c.tp, n.tp);
        EXPECT_EQ(c.fp, n.fp);
        EXPECT_EQ(c.fn, n.fn);
        EXPECT_NEAR(c.itp, n.itp, 1e-9 * std::max(1.0, n.itp));
        EXPECT_NEAR(c.ifn, n.ifn, 1e-9 * std::max(1.0, n.ifn));
      }
    }
  }
}

TEST(AccumulatorTest, RegionsAddUpAndOrderDoesNotMatter) {
  const SceneFixture f = scenes_with_noise(4, 90);
  const int w = f.scenes[0].gt.width(), h = f.scenes[0].gt.height();
  ConfusionAccumulator full(f.table), central(f.table), periph(f.table), reversed(f.table);
  for (std::size_t k = 0; k < f.scenes.size(); ++k) {
    const Scene& s = f.scenes[k];
    full.add(f.preds[k], s.gt, s.instances, full_mask(w, h));
    central.add(f.preds[k], s.gt, s.instances, make_region_mask(w, h, RegionKind::kCentral));
    periph.add(f.preds[k], s.gt, s.instances, make_region_mask(w, h, RegionKind::kPeripheral));
  }
  for (std::size_t k = f.scenes.size(); k-- > 0;) {
    const Scene& s = f.scenes[k];
    reversed.add(f.preds[k], s.gt, s.instances, full_mask(w, h));
  }
  for (int id : full.evaluable_ids()) {
    const ClassCounts a = full.class_counts(id), b = reversed.class_counts(id);
    EXPECT_EQ(a.tp, b.tp);
    EXPECT_EQ(a.fp, b.fp);
    EXPECT_NEAR(a.itp, b.itp, 1e-9);
  }
  ConfusionAccumulator merged = central;
  merged.merge(periph);
  for (int id : full.evaluable_ids()) {
    const ClassCounts a = full.class_counts(id), m = merged.class_counts(id);
    EXPECT_EQ(a.tp, m.tp);
    EXPECT_EQ(a.fp, m.fp);
    EXPECT_EQ(a.fn, m.fn);
    EXPECT_NEAR(a.ifn, m.ifn, 1e-9 * std::max(1.0, a.ifn));
  }
  for (const MetricTable& t : {iou(full, Level::kClass), iiou(full, Level::kClass),
                               iou(full, Level::kCategory), iiou(full, Level::kCategory)}) {
    for (const auto& e : t.entries) {
      if (!e.value) continue;
      EXPECT_GE(*e.value, 0.0);
      EXPECT_LE(*e.value, 1.0);
    }
  }
}

TEST(AccumulatorTest, ShapeAndTableChecks) {
  ConfusionAccumulator acc(micro_table());
  EXPECT_THROW(acc.add(LabelMap(3, 3), LabelMap(3, 4), InstanceSet{}, full_mask(3, 4)),
               DataError);
  EXPECT_THROW(acc.add(LabelMap(3, 3), LabelMap(3, 3), InstanceSet{}, full_mask(2, 3)),
               DataError);
  const ConfusionAccumulator other(
      ClassTable({{0, "road", "flat", std::nullopt, true}}));
  EXPECT_THROW(acc.merge(other), DataError);
}

TEST(RegionKindTest, Names) {
  EXPECT_EQ(parse_region_kind(to_string(RegionKind::kPeripheral)), RegionKind::kPeripheral);
  EXPECT_THROW(parse_region_kind("middle"), DataError);
}

}  // namespace
}  // namespace fovea
