#include "lpcg/error.hpp"
#include "lpcg/kitti_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

namespace lpcg {
namespace {

const std::filesystem::path kData = LPCG_TEST_DATA_DIR;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an lpcg::Error";
  return ErrorCode::kIo;
}

TEST(ParseCalib, IdentityFile) {
  const CalibBundle c = parse_calib(read_file(kData / "identity_calib.txt"));
  Matrix34d eye34 = Matrix34d::Zero();
  eye34.leftCols<3>().setIdentity();
  EXPECT_TRUE(c.P2.isApprox(eye34));
  EXPECT_TRUE(c.R0_rect.isIdentity());
  EXPECT_TRUE(c.Tr_velo_to_cam.isApprox(eye34));
}

TEST(ParseCalib, KittiFixtureMatchesHandParsedTable) {
  const CalibBundle c = parse_calib(read_file(kData / "kitti_calib.txt"));
  // Values copied field by field from the fixture text.
  EXPECT_DOUBLE_EQ(c.P2(0, 0), 721.5377);
  EXPECT_DOUBLE_EQ(c.P2(0, 2), 609.5593);
  EXPECT_DOUBLE_EQ(c.P2(0, 3), 44.85728);
  EXPECT_DOUBLE_EQ(c.P2(1, 1), 721.5377);
  EXPECT_DOUBLE_EQ(c.P2(1, 2), 172.854);
  EXPECT_DOUBLE_EQ(c.P2(1, 3), 0.2163791);
  EXPECT_DOUBLE_EQ(c.P2(2, 3), 0.002745884);
  EXPECT_DOUBLE_EQ(c.R0_rect(0, 0), 0.9999239);
  EXPECT_DOUBLE_EQ(c.R0_rect(0, 1), 0.00983776);
  EXPECT_DOUBLE_EQ(c.R0_rect(1, 0), -0.009869795);
  EXPECT_DOUBLE_EQ(c.R0_rect(2, 2), 0.9999631);
  EXPECT_DOUBLE_EQ(c.Tr_velo_to_cam(0, 1), -0.9999714);
  EXPECT_DOUBLE_EQ(c.Tr_velo_to_cam(0, 3), -0.004069766);
  EXPECT_DOUBLE_EQ(c.Tr_velo_to_cam(1, 2), -0.9998902);
  EXPECT_DOUBLE_EQ(c.Tr_velo_to_cam(2, 0), 0.9998621);
  EXPECT_DOUBLE_EQ(c.Tr_velo_to_cam(2, 3), -0.2717806);
}

TEST(ParseCalib, RoundTripIsByteStable) {
  const std::string text = read_file(kData / "kitti_calib.txt");
  EXPECT_EQ(write_calib(parse_calib(text)), text);
}

TEST(ParseCalib, AlternateCameraKey) {
  const CalibBundle c = parse_calib(read_file(kData / "kitti_calib.txt"), "P3");
  EXPECT_DOUBLE_EQ(c.P2(0, 3), -339.5242);
}

TEST(ParseCalib, Errors) {
  EXPECT_EQ(code_of([] { parse_calib("P2: 1 0 0 0 0 1 0 0 0 0 1\nR0_rect: 1 0 0 0 1 0 0 0 1\n"
                                     "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"); }),
            ErrorCode::kMalformedCalib);
  EXPECT_EQ(code_of([] { parse_calib("R0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"); }),
            ErrorCode::kMissingCalibKey);
  EXPECT_EQ(code_of([] { parse_calib("P2: 1 0 0 0 0 1 0 0 0 0 1 0\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"); }),
            ErrorCode::kMissingCalibKey);
  EXPECT_EQ(code_of([] { parse_calib("P2: 1 0 0 0 0 1 0 0 0 0 1 0\nR0_rect: 2 0 0 0 1 0 0 0 1\n"
                                     "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"); }),
            ErrorCode::kMalformedCalib);
  EXPECT_EQ(code_of([] { parse_calib("P2: 1 0 x 0 0 1 0 0 0 0 1 0\nR0_rect: 1 0 0 0 1 0 0 0 1\n"
                                     "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"); }),
            ErrorCode::kMalformedCalib);
}

TEST(ParseLabel, EmptyFile) { EXPECT_TRUE(parse_label_file("").empty()); }

TEST(ParseLabel, FixtureLine) {
  const auto recs =
      parse_label_file("Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59\n");
  ASSERT_EQ(recs.size(), 1u);
  const LabelRecord& r = recs[0];
  EXPECT_EQ(r.cls, "Car");
  EXPECT_DOUBLE_EQ(r.truncation, 0.0);
  EXPECT_EQ(r.occlusion, 0);
  EXPECT_DOUBLE_EQ(r.alpha, -1.58);
  EXPECT_DOUBLE_EQ(r.bbox2d.x1, 587.01);
  EXPECT_DOUBLE_EQ(r.bbox2d.y2, 200.12);
  EXPECT_DOUBLE_EQ(r.h, 1.65);
  EXPECT_DOUBLE_EQ(r.w, 1.67);
  EXPECT_DOUBLE_EQ(r.l, 3.64);
  EXPECT_DOUBLE_EQ(r.loc.x(), -0.65);
  EXPECT_DOUBLE_EQ(r.loc.y(), 1.71);
  EXPECT_DOUBLE_EQ(r.loc.z(), 46.70);
  EXPECT_DOUBLE_EQ(r.ry, -1.59);
  EXPECT_FALSE(r.score.has_value());
}

TEST(ParseLabel, GoldenRoundTrip) {
  for (const char* name : {"label_golden.txt", "label_scored.txt"}) {
    const std::string text = read_file(kData / name);
    EXPECT_EQ(write_label_file(parse_label_file(text)), text) << name;
  }
}

TEST(ParseLabel, DontCareKeptVerbatim) {
  const auto recs = parse_label_file(read_file(kData / "label_golden.txt"));
  ASSERT_EQ(recs.size(), 7u);
  EXPECT_TRUE(recs[5].is_dont_care());
  EXPECT_EQ(format_label_line(recs[5]), "DontCare -1 -1 -10 503.89 169.71 590.61 190.13 -1 -1 -1 -1000 -1000 -1000 -10");
}

TEST(ParseLabel, ScoreWrittenWithFourDecimals) {
  LabelRecord r;
  r.cls = "Car";
  r.h = 1.5;
  r.w = 1.6;
  r.l = 3.9;
  r.loc = {1.0, 1.7, 20.0};
  r.score = 0.93456;
  EXPECT_EQ(format_label_line(r), "Car 0.00 0 0.00 0.00 0.00 0.00 0.00 1.50 1.60 3.90 1.00 1.70 20.00 0.00 0.9346");
}

TEST(ParseLabel, Errors) {
  try {
    parse_label_file("Car 0 0 0\n\nCar 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedLabelLine);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse_label_file("\nCar 0.00 0 -1.58 587 173 614 200 1.65 1.67 3.64 -0.65 1.71\n"); }),
            ErrorCode::kMalformedLabelLine);
  EXPECT_EQ(code_of([] { parse_label_file("Car 0.00 0 -1.58 587 173 614 200 1.65 1.67 3.64 -0.65 1.71 nan -1.59\n"); }),
            ErrorCode::kMalformedLabelLine);
  EXPECT_EQ(code_of([] { parse_label_file("Car 0.00 0 -1.58 614 173 587 200 1.65 1.67 3.64 -0.65 1.71 40 -1.59\n"); }),
            ErrorCode::kMalformedLabelLine);
}

std::string encode_reference(const std::vector<std::array<float, 4>>& pts) {
  // Written straight from the format: four little-endian IEEE-754 floats.
  std::string out;
  for (const auto& p : pts) {
    for (float f : p) {
      std::uint32_t w;
      std::memcpy(&w, &f, 4);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((w >> (8 * b)) & 0xff));
    }
  }
  return out;
}

TEST(ParseVelodyne, Basics) {
  EXPECT_EQ(parse_velodyne("").size(), 0u);
  const auto cloud = parse_velodyne(encode_reference({{1.0f, 2.0f, 3.0f, 0.5f}}));
  ASSERT_EQ(cloud.size(), 1u);
  EXPECT_EQ(cloud.points[0].x, 1.0f);
  EXPECT_EQ(cloud.points[0].y, 2.0f);
  EXPECT_EQ(cloud.points[0].z, 3.0f);
  EXPECT_EQ(cloud.points[0].r, 0.5f);
  EXPECT_EQ(code_of([] { parse_velodyne(std::string(17, '\0')); }), ErrorCode::kMalformedCloud);
}

TEST(ParseVelodyne, RandomPointsBitwiseEqual) {
  std::mt19937 gen(42);
  std::uniform_real_distribution<float> coord(-100.f, 100.f), refl(0.f, 1.f);
  std::vector<std::array<float, 4>> pts(1000);
  for (auto& p : pts) p = {coord(gen), coord(gen), coord(gen), refl(gen)};
  const auto cloud = parse_velodyne(encode_reference(pts));
  ASSERT_EQ(cloud.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& q = cloud.points[i];
    EXPECT_EQ(std::memcmp(&q, pts[i].data(), 16), 0) << i;
  }
  EXPECT_EQ(encode_velodyne(cloud.points), encode_reference(pts));
}

TEST(ParseVelodyne, NonFiniteDroppedAndCounted) {
  const float inf = std::numeric_limits<float>::infinity();
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const auto cloud = parse_velodyne(encode_reference({{1, 2, 3, 0}, {nan, 0, 0, 0}, {0, inf, 0, 0}, {4, 5, 6, 1}}));
  EXPECT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud.dropped_non_finite, 2u);
  EXPECT_EQ(cloud.points[1].z, 6.0f);
}

TEST(ParseVelodyne, GoldenRoundTrip) {
  const std::string bytes = read_file(kData / "velodyne_golden.bin");
  const auto cloud = parse_velodyne(bytes);
  EXPECT_EQ(cloud.size(), 64u);
  EXPECT_EQ(cloud.points[1].x, -12.25f);
  EXPECT_EQ(encode_velodyne(cloud.points), bytes);
}

TEST(ParseDetections, Basics) {
  EXPECT_TRUE(parse_detections("[]").empty());
  const auto dets = parse_detections(R"([
    {"bbox": [10, 20, 110, 90], "score": 0.95, "class": "car", "mask": [[10,20],[110,20],[110,90],[10,90],[50,95]]},
    {"bbox": [200, 20, 260, 90], "score": 0.42, "class": "car"}
  ])");
  ASSERT_EQ(dets.size(), 2u);
  ASSERT_TRUE(dets[0].mask.has_value());
  EXPECT_EQ(dets[0].mask->size(), 5u);
  EXPECT_DOUBLE_EQ(dets[0].bbox2d.x2, 110.0);
  EXPECT_EQ(dets[0].cls, "car");
  // Low-confidence boxes survive parsing; thresholds are applied downstream.
  EXPECT_DOUBLE_EQ(dets[1].score, 0.42);
  EXPECT_FALSE(dets[1].mask.has_value());

  const auto again = parse_detections(write_detections(dets));
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[0].mask->size(), 5u);
  EXPECT_DOUBLE_EQ(again[1].score, 0.42);
}

TEST(ParseDetections, Errors) {
  EXPECT_EQ(code_of([] { parse_detections("[{"); }), ErrorCode::kMalformedDetections);
  EXPECT_EQ(code_of([] { parse_detections("{}"); }), ErrorCode::kMalformedDetections);
  EXPECT_EQ(code_of([] { parse_detections(R"([{"bbox":[0,0,1,1],"score":1.5,"class":"car"}])"); }),
            ErrorCode::kInvalidScore);
  EXPECT_EQ(code_of([] { parse_detections(R"([{"bbox":[0,0,1,1],"score":-0.1,"class":"car"}])"); }),
            ErrorCode::kInvalidScore);
  EXPECT_EQ(code_of([] { parse_detections(R"([{"bbox":[0,0,1],"score":0.5,"class":"car"}])"); }),
            ErrorCode::kMalformedDetections);
  EXPECT_EQ(code_of([] { parse_detections(R"([{"bbox":[0,0,1,1],"score":0.5,"class":"car","mask":[[0,0],[1,1]]}])"); }),
            ErrorCode::kMalformedDetections);
  EXPECT_EQ(code_of([] { parse_detections(R"([{"bbox":[0,0,1,1],"score":"high","class":"car"}])"); }),
            ErrorCode::kMalformedDetections);
}

TEST(Manifest, ParseResolveAndWrite) {
  const std::string text = R"({
    "sequence_id": "0001",
    "frames": [
      {"frame_id": "000000", "has_annotation": true, "velodyne": "velodyne/000000.bin",
       "calib": "calib/000000.txt", "label": "label_2/000000.txt"},
      {"frame_id": "000001", "has_annotation": false, "velodyne": "/abs/000001.bin"}
    ]})";
  const auto m = parse_manifest(text, "/data/kitti");
  ASSERT_EQ(m.frames.size(), 2u);
  EXPECT_EQ(m.sequence_id.value(), "0001");
  EXPECT_EQ(m.frames[0].velodyne, std::filesystem::path("/data/kitti/velodyne/000000.bin"));
  EXPECT_EQ(m.frames[1].velodyne, std::filesystem::path("/abs/000001.bin"));
  EXPECT_TRUE(m.frames[1].label.empty());

  const auto again = parse_manifest(write_manifest(m, "/data/kitti"), "/data/kitti");
  EXPECT_EQ(again.frames[0].label, m.frames[0].label);
  EXPECT_EQ(again.frames[1].velodyne, m.frames[1].velodyne);
}

TEST(Manifest, Invariants) {
  EXPECT_EQ(code_of([] { parse_manifest(R"({"frames":[{"frame_id":"a"},{"frame_id":"a"}]})", "/"); }),
            ErrorCode::kDuplicateFrameId);
  EXPECT_EQ(code_of([] { parse_manifest(R"({"frames":[{"frame_id":"a","has_annotation":true}]})", "/"); }),
            ErrorCode::kMalformedManifest);
  EXPECT_EQ(code_of([] { parse_manifest(R"({"frames":[{"frame_id":3}]})", "/"); }), ErrorCode::kMalformedManifest);
  EXPECT_EQ(code_of([] { read_file("/nonexistent/file.txt"); }), ErrorCode::kMissingFile);
}

// Arbitrary bytes must only ever produce typed errors.
TEST(ParserFuzz, NeverCrashes) {
  std::mt19937_64 gen(2024);
  const std::string alphabet = "0123456789.-+e :\n\tCarP2R0_rectTr_velo_to_cam[]{}\",bboxscoreclassmask";
  std::uniform_int_distribution<int> len(0, 200), byte(0, 255), pick(0, static_cast<int>(alphabet.size()) - 1);
  std::size_t typed = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string s(static_cast<std::size_t>(len(gen)), '\0');
    const bool textual = i % 2 == 0;
    for (auto& c : s) c = textual ? alphabet[static_cast<std::size_t>(pick(gen))] : static_cast<char>(byte(gen));
    for (int parser = 0; parser < 4; ++parser) {
      try {
        switch (parser) {
          case 0: parse_calib(s); break;
          case 1: parse_label_file(s); break;
          case 2: parse_velodyne(s); break;
          case 3: parse_detections(s); break;
        }
      } catch (const Error&) {
        ++typed;
      }
    }
  }
  EXPECT_GT(typed, 0u);
}

}  // namespace
}  // namespace lpcg
