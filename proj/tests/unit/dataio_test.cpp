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

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "fovea/dataio.hpp"
#include "support/oracles.hpp"
#include "support/tmpdir.hpp"

namespace fovea {
namespace {

using testing::scratch_dir;
using testing::slurp;
using testing::spit;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no DataError thrown";
  return ErrorCode::kIo;
}

std::string pgm16(int w, int h, const std::vector<std::uint16_t>& v) {
  std::string s = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
  for (std::uint16_t x : v) {
    s.push_back(char(x >> 8));
    s.push_back(char(x & 0xff));
  }
  return s;
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) s.push_back(char((v >> (8 * k)) & 0xff));
}

std::string fvt(std::vector<std::uint32_t> dims, const std::vector<float>& v) {
  std::string s = "FVT1";
  put_u32(s, std::uint32_t(dims.size()));
  for (auto d : dims) put_u32(s, d);
  for (float f : v) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(s, bits);
  }
  return s;
}

TEST(LabelMapIoTest, DecodesBigEndianAndIgnore) {
  const auto dir = scratch_dir();
  spit(dir / "a.pgm", pgm16(2, 2, {0, 1, 2, 65535}));
  const LabelMap m = read_label_map(dir / "a.pgm");
  EXPECT_EQ(m(0, 0), 0);
  EXPECT_EQ(m(1, 0), 1);
  EXPECT_EQ(m(0, 1), 2);
  EXPECT_EQ(m(1, 1), kIgnoreLabel);
}

TEST(LabelMapIoTest, HeaderCommentsAreSkipped) {
  const auto dir = scratch_dir();
  std::string s = pgm16(1, 1, {258});
  s.insert(3, "# made by hand\n");
  spit(dir / "c.pgm", s);
  EXPECT_EQ(read_label_map(dir / "c.pgm")(0, 0), 258);
}

TEST(LabelMapIoTest, DistinctErrors) {
  const auto dir = scratch_dir();
  spit(dir / "zero.pgm", "P5 0 0 65535\n");
  spit(dir / "short.pgm", pgm16(2, 2, {1, 2, 3, 4}).substr(0, 20));
  spit(dir / "maxval.pgm", "P5\n1 1\n255\nx");
  spit(dir / "magic.pgm", "P2\n1 1\n65535\n0");
  EXPECT_EQ(code_of([&] { read_label_map(dir / "zero.pgm"); }), ErrorCode::kZeroDimension);
  EXPECT_EQ(code_of([&] { read_label_map(dir / "short.pgm"); }), ErrorCode::kTruncated);
  EXPECT_EQ(code_of([&] { read_label_map(dir / "maxval.pgm"); }), ErrorCode::kUnsupportedMaxval);
  EXPECT_EQ(code_of([&] { read_label_map(dir / "magic.pgm"); }), ErrorCode::kMalformedHeader);
  EXPECT_EQ(code_of([&] { read_label_map(dir / "missing.pgm"); }), ErrorCode::kIo);
}

TEST(LabelMapIoTest, RoundTrips) {
  const auto dir = scratch_dir();
  std::mt19937_64 rng(1);
  LabelMap m(64, 64);
  for (auto& v : m.values()) v = std::uint16_t(rng() % 20);
  m(3, 7) = kIgnoreLabel;
  write_label_map(m, dir / "m.pgm");
  EXPECT_EQ(read_label_map(dir / "m.pgm"), m);
  // Ignore pixels are stored as 65535.
  const std::string bytes = slurp(dir / "m.pgm");
  const std::size_t off = bytes.size() - 2 * 64 * 64 + 2 * (7 * 64 + 3);
  EXPECT_EQ(std::uint8_t(bytes[off]), 0xff);
  EXPECT_EQ(std::uint8_t(bytes[off + 1]), 0xff);

  LabelMap one(1, 1, 9);
  write_label_map(one, dir / "one.pgm");
  EXPECT_EQ(read_label_map(dir / "one.pgm"), one);
}

TEST(ImageIoTest, RoundTrips) {
  const auto dir = scratch_dir();
  std::mt19937_64 rng(2);
  const RgbImage img = testing::random_image(rng, 7, 5);
  write_image(img, dir / "i.ppm");
  EXPECT_EQ(read_image(dir / "i.ppm"), img);
}

TEST(TensorIoTest, RankSelectsType) {
  const auto dir = scratch_dir();
  spit(dir / "h.fvt", fvt({4, 4}, std::vector<float>(16, 1.0f)));
  spit(dir / "s.fvt", fvt({4, 4, 3}, std::vector<float>(48, 0.5f)));
  const Tensor h = read_tensor(dir / "h.fvt");
  ASSERT_TRUE(std::holds_alternative<PerspectiveHeatmap>(h));
  for (float v : std::get<PerspectiveHeatmap>(h).values()) EXPECT_EQ(v, 1.0f);
  const Tensor s = read_tensor(dir / "s.fvt");
  ASSERT_TRUE(std::holds_alternative<ScoreMap>(s));
  EXPECT_EQ(std::get<ScoreMap>(s).num_labels(), 3);
}

TEST(TensorIoTest, DimsAreHeightThenWidth) {
  const auto dir = scratch_dir();
  std::vector<float> v(6);
  for (int k = 0; k < 6; ++k) v[k] = float(k);
  spit(dir / "h.fvt", fvt({2, 3}, v));
  const PerspectiveHeatmap h = read_heatmap(dir / "h.fvt");
  EXPECT_EQ(h.width(), 3);
  EXPECT_EQ(h.height(), 2);
  EXPECT_EQ(h(2, 1), 5.0f);
}

TEST(TensorIoTest, Errors) {
  const auto dir = scratch_dir();
  std::vector<float> nan(16, 1.0f);
  nan[5] = std::numeric_limits<float>::quiet_NaN();
  spit(dir / "nan.fvt", fvt({4, 4}, nan));
  spit(dir / "magic.fvt", "FVT2" + fvt({1, 1}, {1.0f}).substr(4));
  spit(dir / "rank.fvt", fvt({2, 2, 2, 2}, std::vector<float>(16, 0.0f)));
  spit(dir / "short.fvt", fvt({4, 4}, std::vector<float>(15, 0.0f)));
  spit(dir / "neg.fvt", fvt({1, 2}, {1.0f, -1.0f}));
  EXPECT_EQ(code_of([&] { read_tensor(dir / "nan.fvt"); }), ErrorCode::kNonFinite);
  EXPECT_EQ(code_of([&] { read_tensor(dir / "magic.fvt"); }), ErrorCode::kBadMagic);
  EXPECT_EQ(code_of([&] { read_tensor(dir / "rank.fvt"); }), ErrorCode::kBadRank);
  EXPECT_EQ(code_of([&] { read_tensor(dir / "short.fvt"); }), ErrorCode::kTruncated);
  EXPECT_EQ(code_of([&] { read_heatmap(dir / "neg.fvt"); }), ErrorCode::kOutOfRange);
}

TEST(TensorIoTest, RoundTripsBitExact) {
  const auto dir = scratch_dir();
  std::mt19937_64 rng(3);
  const ScoreMap s = testing::random_scores(rng, 8, 8, 5);
  write_tensor(s, dir / "s.fvt");
  EXPECT_EQ(read_scores(dir / "s.fvt"), s);
  PerspectiveHeatmap h(1, 1, 0.1f);
  write_tensor(h, dir / "h.fvt");
  EXPECT_EQ(read_heatmap(dir / "h.fvt"), h);
}

TEST(TensorIoTest, UnwritablePathIsIoError) {
  const PerspectiveHeatmap h(1, 1);
  EXPECT_EQ(code_of([&] { write_tensor(h, "/nonexistent-dir/x/h.fvt"); }), ErrorCode::kIo);
}

ClassTable demo_table() {
  return ClassTable({{0, "road", "flat", std::nullopt, true},
                     {1, "car", "vehicle", std::nullopt, true},
                     {2, "person", "human", std::nullopt, true}});
}

std::string annotation(int w, int h, const std::string& objects) {
  return "{\"width\":" + std::to_string(w) + ",\"height\":" + std::to_string(h) +
         ",\"objects\":[" + objects + "]}";
}

TEST(AnnotationTest, SquareCoversPixelCenters) {
  const auto dir = scratch_dir();
  spit(dir / "a.json",
       annotation(8, 8, R"({"label":"car","polygon":[[0,0],[4,0],[4,4],[0,4]]})"));
  const InstanceSet s = ingest_polygon_annotations(dir / "a.json", demo_table(), 8, 8);
  ASSERT_EQ(s.instances.size(), 1u);
  EXPECT_EQ(s.instances[0].area, 16);
  EXPECT_EQ(s.instances[0].class_id, 1);
}

TEST(AnnotationTest, LaterInstanceOverwrites) {
  const auto dir = scratch_dir();
  const std::string sq = R"([[0,0],[4,0],[4,4],[0,4]])";
  spit(dir / "a.json", annotation(8, 8,
                                  R"({"label":"car","polygon":)" + sq + "},"
                                  R"({"label":"person","polygon":)" + sq + "}"));
  const InstanceSet s = ingest_polygon_annotations(dir / "a.json", demo_table(), 8, 8);
  ASSERT_EQ(s.instances.size(), 2u);
  EXPECT_EQ(s.instances[0].area, 0);
  EXPECT_EQ(s.instances[1].area, 16);
}

TEST(AnnotationTest, TriangleMatchesCenterRule) {
  // Right triangle (0,0)-(6,0)-(0,6). Edges are half-open, so centers that
  // land exactly on the hypotenuse stay outside.
  const auto dir = scratch_dir();
  spit(dir / "t.json",
       annotation(8, 8, R"({"label":"car","polygon":[[0,0],[6,0],[0,6]]})"));
  const InstanceSet s = ingest_polygon_annotations(dir / "t.json", demo_table(), 8, 8);
  std::int64_t expect = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) expect += (x + 0.5) + (y + 0.5) < 6.0;
  }
  EXPECT_EQ(s.instances[0].area, expect);
}

TEST(AnnotationTest, Errors) {
  const auto dir = scratch_dir();
  spit(dir / "deg.json", annotation(8, 8, R"({"label":"car","polygon":[[0,0],[4,0]]})"));
  spit(dir / "unk.json", annotation(8, 8, R"({"label":"tram","polygon":[[0,0],[4,0],[4,4]]})"));
  spit(dir / "size.json", annotation(9, 8, ""));
  spit(dir / "bad.json", "{not json");
  const ClassTable t = demo_table();
  EXPECT_EQ(code_of([&] { ingest_polygon_annotations(dir / "deg.json", t, 8, 8); }),
            ErrorCode::kMalformed);
  EXPECT_EQ(code_of([&] { ingest_polygon_annotations(dir / "unk.json", t, 8, 8); }),
            ErrorCode::kUnknownClass);
  EXPECT_EQ(code_of([&] { ingest_polygon_annotations(dir / "size.json", t, 8, 8); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { ingest_polygon_annotations(dir / "bad.json", t, 8, 8); }),
            ErrorCode::kMalformed);
}

TEST(AnnotationTest, OutsidePolygonWarnsAndSkips) {
  const auto dir = scratch_dir();
  spit(dir / "o.json", annotation(8, 8,
                                  R"({"label":"car","polygon":[[20,20],[30,20],[30,30]]})"));
  std::vector<std::string> warnings;
  const InstanceSet s =
      ingest_polygon_annotations(dir / "o.json", demo_table(), 8, 8, &warnings);
  EXPECT_TRUE(s.instances.empty());
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(AnnotationTest, WriteThenIngestRoundTrips) {
  const auto dir = scratch_dir();
  write_polygon_annotations({{"car", {{1, 1}, {5, 1}, {5, 3}, {1, 3}}},
                             {"person", {{4, 0}, {6, 0}, {6, 6}, {4, 6}}}},
                            8, 8, dir / "w.json");
  const InstanceSet s = ingest_polygon_annotations(dir / "w.json", demo_table(), 8, 8);
  ASSERT_EQ(s.instances.size(), 2u);
  EXPECT_EQ(s.instances[0].area, 8 - 2);
  EXPECT_EQ(s.instances[1].area, 12);
}

TEST(BoxesTest, ParsesClampsAndValidates) {
  const auto dir = scratch_dir();
  spit(dir / "b.json", R"([{"x0":0,"y0":0,"x1":10,"y1":10,"score":0.9,"class_id":13}])");
  auto boxes = read_boxes(dir / "b.json", 20, 20);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].class_id, 13);
  EXPECT_EQ(boxes[0].x1, 10);

  boxes = read_boxes(dir / "b.json", 6, 4);
  EXPECT_EQ(boxes[0].x1, 6);
  EXPECT_EQ(boxes[0].y1, 4);

  spit(dir / "s.json", R"([{"x0":0,"y0":0,"x1":10,"y1":10,"score":1.5,"class_id":1}])");
  EXPECT_EQ(code_of([&] { read_boxes(dir / "s.json", 20, 20); }), ErrorCode::kOutOfRange);
  spit(dir / "e.json", R"([{"x0":5,"y0":0,"x1":5,"y1":10,"score":0.5,"class_id":1}])");
  EXPECT_EQ(code_of([&] { read_boxes(dir / "e.json", 20, 20); }), ErrorCode::kMalformed);

  spit(dir / "o.json", R"([{"x0":30,"y0":30,"x1":40,"y1":40,"score":0.5,"class_id":1}])");
  std::vector<std::string> warnings;
  EXPECT_TRUE(read_boxes(dir / "o.json", 20, 20, &warnings).empty());
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(BoxesTest, WriteReadRoundTrip) {
  const auto dir = scratch_dir();
  const std::vector<DetectionBox> boxes{{1, 2, 5, 6, 0.25, 3}, {0, 0, 2, 2, 1.0, 1}};
  write_boxes(boxes, dir / "b.json");
  const auto back = read_boxes(dir / "b.json", 10, 10);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].x0, 1);
  EXPECT_EQ(back[0].score, 0.25);
  EXPECT_EQ(back[1].class_id, 1);
}

TEST(ClassTableIoTest, RoundTripAndValidation) {
  const auto dir = scratch_dir();
  const ClassTable t({{0, "road", "flat", std::nullopt, true},
                      {3, "car", "vehicle", 123.5, true},
                      {4, "sky", "void", std::nullopt, false}});
  write_class_table(t, dir / "c.json");
  const ClassTable back = read_class_table(dir / "c.json");
  ASSERT_EQ(back.classes().size(), 3u);
  EXPECT_EQ(back.find(3)->avg_size, 123.5);
  EXPECT_FALSE(back.find(4)->evaluable);
  spit(dir / "dup.json",
       R"({"classes":[{"id":1,"name":"a","category":"x"},{"id":1,"name":"b","category":"x"}]})");
  EXPECT_THROW(read_class_table(dir / "dup.json"), DataError);
}

TEST(ValidateLabelsTest, RejectsUnknownIds) {
  LabelMap m(2, 1);
  m(0, 0) = kIgnoreLabel;
  m(1, 0) = 7;
  EXPECT_EQ(code_of([&] { validate_labels(m, demo_table()); }), ErrorCode::kUnknownClass);
  m(1, 0) = 2;
  EXPECT_NO_THROW(validate_labels(m, demo_table()));
}

}  // namespace
}  // namespace fovea
