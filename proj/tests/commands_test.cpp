#include "lpcg/commands.hpp"
#include "lpcg/error.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>

namespace lpcg::cli {
namespace {

using nlohmann::json;

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lpcg_cmd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an lpcg::Error";
  return ErrorCode::kIo;
}

std::string dir_snapshot(const fs::path& dir) {
  std::string out;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out += fs::relative(f, dir).string() + "\n" + read_file(f);
  return out;
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig d = parse_run_config("{}");
  EXPECT_DOUBLE_EQ(d.lowcost.det2d_score_min, 0.9);
  EXPECT_DOUBLE_EQ(d.lowcost.cluster.eps, 0.6);
  EXPECT_EQ(d.lowcost.cluster.min_pts, 5u);
  EXPECT_DOUBLE_EQ(d.merge.det3d_score_min, 0.7);
  EXPECT_DOUBLE_EQ(d.eval.iou_min, 0.5);
  EXPECT_DOUBLE_EQ(d.ap.iou_min, 0.7);

  const RunConfig c = parse_run_config(R"({"seed": 9, "jobs": 3, "lowcost": {"eps": 0.4, "classes": ["Car","Van"]},
    "disturb": {"p": 0.1, "groups": ["dimension"]}, "eval": {"space": "3d", "sweep": [0.3, 0.7]}})");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.jobs, 3u);
  EXPECT_DOUBLE_EQ(c.lowcost.cluster.eps, 0.4);
  EXPECT_EQ(c.lowcost.classes.size(), 2u);
  EXPECT_EQ(c.disturb.groups, std::vector<LabelGroup>{LabelGroup::kDimension});
  EXPECT_EQ(c.eval.space, IouSpace::k3d);
  EXPECT_EQ(c.eval_sweep.size(), 2u);

  // Dump and re-read is a fixed point.
  EXPECT_EQ(run_config_to_json(parse_run_config(run_config_to_json(c))), run_config_to_json(c));
}

TEST(Config, Rejections) {
  for (const char* bad : {R"({"sed": 1})", R"({"lowcost": {"epsilon": 1}})", R"({"lowcost": {"eps": -1}})",
                          R"({"eval": {"space": "2d"}})", R"({"disturb": {"p": "x"}})", "not json",
                          R"({"lowcost": {"width_range": [2, 1]}})", R"({"jobs": 0})"}) {
    EXPECT_EQ(code_of([&] { parse_run_config(bad); }), ErrorCode::kInvalidConfig) << bad;
  }
}

TEST(FrameKey, Fnv1a) {
  EXPECT_EQ(frame_stream_key(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(frame_stream_key("a"), 0xaf63dc4c8601ec8cull);
}

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fresh_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    cfg_.synth_frames = 4;
    cfg_.seed = 21;
    cfg_.synth.min_visible_faces = 2;
    manifest_ = cmd_synth(root_ / "data", cfg_);
  }

  fs::path root_;
  RunConfig cfg_;
  DatasetManifest manifest_;
};

TEST_F(Pipeline, SynthLowcostEval) {
  ASSERT_EQ(manifest_.frames.size(), 4u);
  EXPECT_EQ(manifest_.frames[3].frame_id, "000003");
  EXPECT_TRUE(fs::exists(root_ / "data" / "manifest.json"));

  const auto summary = cmd_lowcost(root_ / "data" / "manifest.json", root_ / "pl", cfg_);
  EXPECT_TRUE(summary.complete());
  EXPECT_EQ(summary.frames.size(), 4u);
  EXPECT_EQ(summary.totals.n_detections, 12u);
  const json report = json::parse(read_file(root_ / "pl" / "report.json"));
  EXPECT_TRUE(report["complete"].get<bool>());
  EXPECT_EQ(report["totals"]["n_emitted"].get<std::size_t>(), summary.totals.n_emitted);

  const auto ev = cmd_eval(root_ / "pl", root_ / "data" / "label_2", cfg_, true);
  EXPECT_EQ(ev.n_frames, 4u);
  EXPECT_EQ(ev.totals.tp, summary.totals.n_emitted);
  EXPECT_EQ(ev.totals.fp, 0u);
  ASSERT_TRUE(ev.mre.has_value());
  EXPECT_LT(ev.mre->dim[2], 0.05);
  const json ej = json::parse(eval_report_json(ev, cfg_));
  EXPECT_EQ(ej["ap40"].size(), 6u);
  EXPECT_FALSE(eval_table(ev).empty());
}

TEST_F(Pipeline, LowcostDeterministicAcrossJobs) {
  RunConfig one = cfg_, many = cfg_;
  one.jobs = 1;
  many.jobs = 4;
  cmd_lowcost(root_ / "data" / "manifest.json", root_ / "j1", one);
  cmd_lowcost(root_ / "data" / "manifest.json", root_ / "j4", many);
  EXPECT_EQ(dir_snapshot(root_ / "j1"), dir_snapshot(root_ / "j4"));
}

TEST_F(Pipeline, LowcostMissingFileWritesNothing) {
  fs::remove(manifest_.frames[2].velodyne);
  EXPECT_EQ(code_of([&] { cmd_lowcost(root_ / "data" / "manifest.json", root_ / "out", cfg_); }),
            ErrorCode::kMissingFile);
  EXPECT_FALSE(fs::exists(root_ / "out"));
}

TEST_F(Pipeline, LowcostReportsBadFrame) {
  write_file(manifest_.frames[1].detections, "[{");
  const auto summary = cmd_lowcost(root_ / "data" / "manifest.json", root_ / "out", cfg_);
  EXPECT_FALSE(summary.complete());
  ASSERT_EQ(summary.errors.size(), 1u);
  EXPECT_EQ(summary.errors[0].rfind("000001: ", 0), 0u);
  EXPECT_TRUE(fs::exists(root_ / "out" / "000000.txt"));
}

TEST_F(Pipeline, EvalFrameMismatchAndAp) {
  fs::create_directories(root_ / "pred");
  for (const auto& id : list_frame_ids(root_ / "data" / "label_2")) {
    auto recs = parse_label_file(read_file(root_ / "data" / "label_2" / (id + ".txt")));
    for (auto& r : recs) r.score = 0.9;
    write_file(root_ / "pred" / (id + ".txt"), write_label_file(recs));
  }
  const ApReport ap = cmd_ap(root_ / "pred", root_ / "data" / "label_2", cfg_);
  // Synthetic gt carries no truncation or occlusion; every box is at least
  // hard-bucket sized, so hard AP is exactly 100.
  EXPECT_DOUBLE_EQ(ap.bev[2].ap, 100.0);
  EXPECT_DOUBLE_EQ(ap.box3d[2].ap, 100.0);
  EXPECT_NE(ap_curves_csv(ap).find("recall,"), std::string::npos);
  EXPECT_EQ(json::parse(ap_report_json(ap, cfg_.ap))["rows"].size(), 3u);

  fs::remove(root_ / "pred" / "000002.txt");
  write_file(root_ / "pred" / "999999.txt", "");
  try {
    cmd_eval(root_ / "pred", root_ / "data" / "label_2", cfg_, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFrameSetMismatch);
    EXPECT_NE(std::string(e.what()).find("000002"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("999999"), std::string::npos);
  }
}

TEST_F(Pipeline, DisturbAndMerge) {
  RunConfig c = cfg_;
  c.disturb.p = 0.1;
  c.disturb.groups = {LabelGroup::kLocation, LabelGroup::kDimension};
  EXPECT_EQ(cmd_disturb(root_ / "data" / "label_2", root_ / "d1", c), 4u);
  cmd_disturb(root_ / "data" / "label_2", root_ / "d2", c);
  EXPECT_EQ(dir_snapshot(root_ / "d1"), dir_snapshot(root_ / "d2"));
  EXPECT_NE(dir_snapshot(root_ / "d1"), dir_snapshot(root_ / "data" / "label_2"));
  EXPECT_EQ(code_of([&] { cmd_disturb(root_ / "d1", root_ / "d1", c); }), ErrorCode::kInvalidConfig);

  // Split the synthetic set: two annotated frames, two to be pseudo-labeled.
  DatasetManifest a, b;
  a.frames = {manifest_.frames[0], manifest_.frames[1]};
  b.frames = {manifest_.frames[2], manifest_.frames[3]};
  for (auto& f : b.frames) {
    f.has_annotation = false;
    f.label.clear();
  }
  write_file(root_ / "a.json", write_manifest(a, root_));
  write_file(root_ / "b.json", write_manifest(b, root_));
  fs::create_directories(root_ / "det3d");
  EXPECT_EQ(code_of([&] { cmd_merge(root_ / "a.json", root_ / "b.json", root_ / "det3d", root_ / "m", c); }),
            ErrorCode::kMissingDetections);
  EXPECT_FALSE(fs::exists(root_ / "m" / "merged_manifest.json"));
  for (const auto& f : b.frames) {
    auto recs = parse_label_file(read_file(root_ / "data" / "label_2" / (f.frame_id + ".txt")));
    for (std::size_t i = 0; i < recs.size(); ++i) recs[i].score = i == 0 ? 0.5 : 0.9;
    write_file(root_ / "det3d" / (f.frame_id + ".txt"), write_label_file(recs));
  }
  const auto res = cmd_merge(root_ / "a.json", root_ / "b.json", root_ / "det3d", root_ / "m", c);
  EXPECT_EQ(res.n_dropped, 2u);
  EXPECT_EQ(res.n_kept, 4u);
  const auto merged = load_manifest(root_ / "m" / "merged_manifest.json");
  ASSERT_EQ(merged.frames.size(), 4u);
  EXPECT_TRUE(merged.frames[3].pseudo_label);
  EXPECT_EQ(parse_label_file(read_file(merged.frames[3].label)).size(), 2u);
}

TEST_F(Pipeline, RenderBev) {
  const auto& f = manifest_.frames[0];
  cmd_render_bev(f.velodyne, f.calib, {f.label}, root_ / "bev.svg");
  const std::string svg = read_file(root_ / "bev.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
}

}  // namespace
}  // namespace lpcg::cli
