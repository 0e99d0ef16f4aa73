// lpcg: LiDAR pseudo-label generation, merging, disturbance and evaluation.

#include "lpcg/commands.hpp"
#include "lpcg/error.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using lpcg::cli::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("lpcg");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("LPCG_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"LiDAR point-cloud pseudo-label toolkit"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for every stochastic stage");
  app.add_option("--jobs", jobs, "Worker threads (frame-parallel)")->check(CLI::PositiveNumber);

  // lowcost
  auto* lowcost = app.add_subcommand("lowcost", "Generate pseudo labels from LiDAR frustums");
  std::string lc_manifest, lc_out;
  std::optional<double> lc_score, lc_eps;
  std::optional<std::size_t> lc_min_pts;
  lowcost->add_option("--manifest", lc_manifest, "Dataset manifest")->required();
  lowcost->add_option("--out", lc_out, "Output label directory")->required();
  lowcost->add_option("--det2d-score-min", lc_score, "2D detection confidence threshold");
  lowcost->add_option("--eps", lc_eps, "DBSCAN radius (m)");
  lowcost->add_option("--min-pts", lc_min_pts, "DBSCAN minimum neighbourhood size");

  // merge
  auto* merge = app.add_subcommand("merge", "Filter external 3D detections and merge with labeled data");
  std::string mg_labeled, mg_unlabeled, mg_det3d, mg_out;
  std::optional<double> mg_score;
  merge->add_option("--labeled", mg_labeled, "Manifest of the annotated split")->required();
  merge->add_option("--unlabeled", mg_unlabeled, "Manifest of the unannotated split")->required();
  merge->add_option("--det3d-dir", mg_det3d, "KITTI-format 3D detections, one file per unlabeled frame")->required();
  merge->add_option("--out", mg_out, "Output directory")->required();
  merge->add_option("--det3d-score-min", mg_score, "3D detection confidence threshold");

  // disturb
  auto* disturb = app.add_subcommand("disturb", "Randomly scale label parameters within +-p/2");
  std::string ds_in, ds_out;
  std::optional<double> ds_p;
  std::optional<std::string> ds_groups;
  disturb->add_option("--labels-dir", ds_in, "Input label directory")->required();
  disturb->add_option("--out", ds_out, "Output label directory")->required();
  disturb->add_option("--p", ds_p, "Percentage range as a fraction (0.05 = 5%)");
  disturb->add_option("--groups", ds_groups, "Comma list of location,dimension,orientation");

  // eval
  auto* eval = app.add_subcommand("eval", "Compare pseudo labels with annotations");
  std::string ev_pseudo, ev_gt;
  std::optional<std::string> ev_json, ev_space, ev_sweep;
  std::optional<double> ev_iou;
  bool ev_ap = false;
  eval->add_option("--pseudo-dir", ev_pseudo, "Pseudo label directory")->required();
  eval->add_option("--gt-dir", ev_gt, "Annotation directory")->required();
  eval->add_option("--iou", ev_iou, "Match threshold");
  eval->add_option("--space", ev_space, "bev or 3d");
  eval->add_option("--sweep", ev_sweep, "Comma list of extra thresholds");
  eval->add_option("--json", ev_json, "Write the report here");
  eval->add_flag("--ap", ev_ap, "Also compute AP40 rows at IoU 0.7 and 0.5");

  // ap
  auto* ap = app.add_subcommand("ap", "KITTI-style average precision");
  std::string ap_pred, ap_gt;
  std::optional<std::string> ap_json, ap_csv, ap_class;
  std::optional<double> ap_iou;
  bool ap_11 = false;
  ap->add_option("--pred-dir", ap_pred, "Detections (16-field label files)")->required();
  ap->add_option("--gt-dir", ap_gt, "Annotations")->required();
  ap->add_option("--iou", ap_iou, "IoU threshold");
  ap->add_option("--class", ap_class, "Evaluated class");
  ap->add_option("--json", ap_json, "Write the report here");
  ap->add_option("--pr-csv", ap_csv, "Write interpolated precision samples here");
  ap->add_flag("--ap11", ap_11, "Use the legacy 11 recall points");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with known boxes");
  std::string sy_out;
  std::optional<std::size_t> sy_frames, sy_objects;
  synth->add_option("--out", sy_out, "Output directory")->required();
  synth->add_option("--frames", sy_frames, "Number of frames");
  synth->add_option("--objects", sy_objects, "Objects per frame");

  // render-bev
  auto* render = app.add_subcommand("render-bev", "Draw a bird's-eye view SVG");
  std::optional<std::string> rb_cloud, rb_calib;
  std::vector<std::string> rb_labels;
  std::string rb_out;
  render->add_option("--cloud", rb_cloud, "Velodyne .bin")->check(CLI::ExistingFile);
  render->add_option("--calib", rb_calib, "Calibration file")->check(CLI::ExistingFile);
  render->add_option("--labels", rb_labels, "Label files, one colour each");
  render->add_option("--out", rb_out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = config_path ? lpcg::cli::load_run_config(*config_path) : RunConfig{};
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;

    if (*lowcost) {
      if (lc_score) cfg.lowcost.det2d_score_min = *lc_score;
      if (lc_eps) cfg.lowcost.cluster.eps = *lc_eps;
      if (lc_min_pts) cfg.lowcost.cluster.min_pts = *lc_min_pts;
      const auto summary = lpcg::cli::cmd_lowcost(lc_manifest, lc_out, cfg);
      std::cout << lpcg::cli::lowcost_report_json(summary);
      return summary.complete() ? kExitOk : kExitDomain;
    }
    if (*merge) {
      if (mg_score) cfg.merge.det3d_score_min = *mg_score;
      const auto result = lpcg::cli::cmd_merge(mg_labeled, mg_unlabeled, mg_det3d, mg_out, cfg);
      std::cout << "frames " << result.merged.frames.size() << " kept " << result.n_kept << " dropped "
                << result.n_dropped << "\n";
      return kExitOk;
    }
    if (*disturb) {
      if (ds_p) cfg.disturb.p = *ds_p;
      if (ds_groups) {
        cfg.disturb.groups.clear();
        for (const auto& g : split_csv(*ds_groups)) cfg.disturb.groups.push_back(lpcg::parse_label_group(g));
      }
      const std::size_t n = lpcg::cli::cmd_disturb(ds_in, ds_out, cfg);
      std::cout << "disturbed " << n << " files\n";
      return kExitOk;
    }
    if (*eval) {
      if (ev_iou) cfg.eval.iou_min = *ev_iou;
      if (ev_space) cfg.eval.space = *ev_space == "3d" ? lpcg::IouSpace::k3d : lpcg::IouSpace::kBev;
      if (ev_space && *ev_space != "3d" && *ev_space != "bev")
        throw lpcg::Error(lpcg::ErrorCode::kInvalidConfig, "--space must be bev or 3d");
      if (ev_sweep) {
        cfg.eval_sweep.clear();
        for (const auto& t : split_csv(*ev_sweep)) cfg.eval_sweep.push_back(std::stod(t));
      }
      const auto summary = lpcg::cli::cmd_eval(ev_pseudo, ev_gt, cfg, ev_ap);
      const std::string report = lpcg::cli::eval_report_json(summary, cfg);
      if (ev_json) lpcg::write_file(*ev_json, report);
      std::cout << lpcg::cli::eval_table(summary);
      return kExitOk;
    }
    if (*ap) {
      if (ap_iou) cfg.ap.iou_min = *ap_iou;
      if (ap_class) cfg.ap.cls = *ap_class;
      if (ap_11) cfg.ap.ap11 = true;
      const auto report = lpcg::cli::cmd_ap(ap_pred, ap_gt, cfg);
      if (ap_json) lpcg::write_file(*ap_json, lpcg::cli::ap_report_json(report, cfg.ap));
      if (ap_csv) lpcg::write_file(*ap_csv, lpcg::cli::ap_curves_csv(report));
      std::cout << lpcg::cli::ap_table(report, cfg.ap);
      return kExitOk;
    }
    if (*synth) {
      if (sy_frames) cfg.synth_frames = *sy_frames;
      if (sy_objects) cfg.synth.n_objects = *sy_objects;
      const auto manifest = lpcg::cli::cmd_synth(sy_out, cfg);
      std::cout << "wrote " << manifest.frames.size() << " frames to " << sy_out << "\n";
      return kExitOk;
    }
    if (*render) {
      std::vector<fs::path> labels(rb_labels.begin(), rb_labels.end());
      std::optional<fs::path> cloud, calib;
      if (rb_cloud) cloud = *rb_cloud;
      if (rb_calib) calib = *rb_calib;
      lpcg::cli::cmd_render_bev(cloud, calib, labels, rb_out);
      return kExitOk;
    }
  } catch (const lpcg::Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == lpcg::ErrorCode::kInvalidConfig ? kExitUsage : kExitDomain;
  } catch (const std::logic_error& e) {
    spdlog::error("bad argument: {}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitDomain;
  }
  return kExitUsage;
}
