#pragma once

// Library side of the `lpcg` command-line tool. Each command validates its
// inputs before writing anything and throws lpcg::Error on failure.

#include "lpcg/eval.hpp"
#include "lpcg/kitti_io.hpp"
#include "lpcg/label.hpp"
#include "lpcg/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lpcg::cli {

namespace fs = std::filesystem;

struct RunConfig {
  LowCostConfig lowcost;
  HighAccConfig merge;
  DisturbConfig disturb;
  MatchOptions eval;
  std::vector<double> eval_sweep;  // extra IoU thresholds reported by `eval`
  ApOptions ap;
  SceneParams synth;
  std::size_t synth_frames = 10;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void validate() const;
};

// Missing keys keep their defaults; unknown keys are an InvalidConfig error.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const fs::path& path);
std::string run_config_to_json(const RunConfig& cfg);

struct LowcostSummary {
  std::vector<FrameReport> frames;  // manifest order
  FrameReport totals;
  std::vector<std::string> errors;  // "frame_id: message"

  bool complete() const { return errors.empty(); }
};

// Writes `<out_dir>/<frame_id>.txt` per frame and `<out_dir>/report.json`.
LowcostSummary cmd_lowcost(const fs::path& manifest, const fs::path& out_dir, const RunConfig& cfg);
std::string lowcost_report_json(const LowcostSummary& summary);

// Pseudo labels go to `<out_dir>/pseudo_labels/`, the union manifest to
// `<out_dir>/merged_manifest.json`. Detections for frame F are read from
// `<det3d_dir>/F.txt`.
AssembleResult cmd_merge(const fs::path& labeled_manifest, const fs::path& unlabeled_manifest,
                         const fs::path& det3d_dir, const fs::path& out_dir, const RunConfig& cfg);

// Disturbs every `*.txt` label file under `labels_dir` into `out_dir`; the
// frame id (file stem) keys each file's random stream. Returns files written.
std::size_t cmd_disturb(const fs::path& labels_dir, const fs::path& out_dir, const RunConfig& cfg);

struct EvalSummary {
  std::size_t n_frames = 0;
  MatchReport totals;  // matches are not retained across frames
  std::optional<MreReport> mre;
  std::vector<std::pair<double, MatchReport>> sweep;
  std::optional<ApReport> ap_strict;  // IoU 0.7
  std::optional<ApReport> ap_loose;   // IoU 0.5
};

// Throws FrameSetMismatch when the two directories hold different frame ids.
EvalSummary cmd_eval(const fs::path& pseudo_dir, const fs::path& gt_dir, const RunConfig& cfg, bool with_ap);
std::string eval_report_json(const EvalSummary& summary, const RunConfig& cfg);
std::string eval_table(const EvalSummary& summary);

ApReport cmd_ap(const fs::path& pred_dir, const fs::path& gt_dir, const RunConfig& cfg);
std::string ap_report_json(const ApReport& report, const ApOptions& opts);
// One row per recall sample: recall, then easy/moderate/hard for BEV and 3D.
std::string ap_curves_csv(const ApReport& report);
std::string ap_table(const ApReport& report, const ApOptions& opts);

// Generates `cfg.synth_frames` scenes (frame i seeded from cfg.seed and i)
// and writes them plus `<out_dir>/manifest.json`.
DatasetManifest cmd_synth(const fs::path& out_dir, const RunConfig& cfg);

void cmd_render_bev(const std::optional<fs::path>& cloud, const std::optional<fs::path>& calib,
                    const std::vector<fs::path>& label_files, const fs::path& out_svg);

// Sorted stems of the `*.txt` files directly inside `dir`.
std::vector<std::string> list_frame_ids(const fs::path& dir);

// FNV-1a of the frame id; stable across platforms and runs.
std::uint64_t frame_stream_key(std::string_view frame_id);

}  // namespace lpcg::cli
