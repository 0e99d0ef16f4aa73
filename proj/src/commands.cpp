#include "lpcg/commands.hpp"

#include "lpcg/error.hpp"
#include "lpcg/render_bev.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <random>
#include <set>
#include <thread>

namespace lpcg::cli {
namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& why) { throw Error(ErrorCode::kInvalidConfig, why); }

template <typename Fn>
void for_each_key(const json& obj, std::string_view section, Fn&& fn) {
  if (!obj.is_object()) bad_config(fmt::format("'{}' must be an object", section));
  for (const auto& [key, value] : obj.items()) {
    if (!fn(key, value)) bad_config(fmt::format("unknown key '{}' in '{}'", key, section));
  }
}

Range read_range(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    bad_config(fmt::format("'{}' must be [min, max]", name));
  return {j[0].get<double>(), j[1].get<double>()};
}

json range_json(const Range& r) { return json::array({r.min, r.max}); }

IouSpace parse_space(const std::string& s) {
  if (s == "bev") return IouSpace::kBev;
  if (s == "3d") return IouSpace::k3d;
  bad_config(fmt::format("space must be 'bev' or '3d', got '{}'", s));
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const std::size_t threads = std::min<std::size_t>(jobs, n);
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
}

void require_file(const fs::path& p, const std::string& frame_id, const char* what) {
  if (p.empty()) throw Error(ErrorCode::kMissingFile, fmt::format("frame {} has no {} path", frame_id, what));
  std::error_code ec;
  if (!fs::is_regular_file(p, ec))
    throw Error(ErrorCode::kMissingFile, fmt::format("frame {}: {} file {} not found", frame_id, what, p.string()));
}

void require_dir(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_directory(p, ec)) throw Error(ErrorCode::kMissingFile, fmt::format("directory {} not found", p.string()));
}

json frame_report_json(const FrameReport& r) {
  return json{{"frame_id", r.frame_id},           {"n_detections", r.n_detections},
              {"n_low_score", r.n_low_score},     {"n_other_class", r.n_other_class},
              {"n_skipped_empty", r.n_skipped_empty}, {"n_no_cluster", r.n_no_cluster},
              {"n_filtered_dims", r.n_filtered_dims}, {"n_suppressed", r.n_suppressed},
              {"n_emitted", r.n_emitted}};
}

void accumulate(FrameReport& total, const FrameReport& r) {
  total.n_detections += r.n_detections;
  total.n_low_score += r.n_low_score;
  total.n_other_class += r.n_other_class;
  total.n_skipped_empty += r.n_skipped_empty;
  total.n_no_cluster += r.n_no_cluster;
  total.n_filtered_dims += r.n_filtered_dims;
  total.n_suppressed += r.n_suppressed;
  total.n_emitted += r.n_emitted;
}

std::vector<LabelRecord> load_labels(const fs::path& p) { return parse_label_file(read_file(p)); }

void check_same_frames(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a == b) return;
  std::vector<std::string> diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
  std::string listed;
  for (const auto& id : diff) listed += (listed.empty() ? "" : ", ") + id;
  throw Error(ErrorCode::kFrameSetMismatch, fmt::format("frames present on one side only: {}", listed));
}

std::string percent(double v) { return fmt::format("{:.1f}%", 100.0 * v); }

json ap_rows_json(const ApReport& report) {
  json rows = json::array();
  for (std::size_t d = 0; d < 3; ++d) {
    rows.push_back({{"difficulty", to_string(static_cast<Difficulty>(d))},
                    {"iou_min", report.iou_min},
                    {"ap_bev", report.bev[d].ap},
                    {"ap_3d", report.box3d[d].ap},
                    {"n_gt", report.bev[d].n_gt}});
  }
  return rows;
}

}  // namespace

void RunConfig::validate() const {
  lowcost.validate();
  merge.validate();
  disturb.validate();
  synth.validate();
  if (!(eval.iou_min >= 0.0 && eval.iou_min <= 1.0)) bad_config("eval.iou_min must be in [0,1]");
  if (!(ap.iou_min >= 0.0 && ap.iou_min <= 1.0)) bad_config("ap.iou_min must be in [0,1]");
  for (double t : eval_sweep)
    if (!(t >= 0.0 && t <= 1.0)) bad_config("eval.sweep thresholds must be in [0,1]");
  if (jobs < 1) bad_config("jobs must be >= 1");
}

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::exception& e) {
    bad_config(e.what());
  }

  RunConfig cfg;
  try {
    for_each_key(doc, "config", [&](const std::string& key, const json& v) {
      if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "jobs") {
        cfg.jobs = v.get<unsigned>();
      } else if (key == "lowcost") {
        for_each_key(v, key, [&](const std::string& k, const json& x) {
          auto& c = cfg.lowcost;
          if (k == "det2d_score_min") c.det2d_score_min = x.get<double>();
          else if (k == "width_range") c.width_range = read_range(x, k);
          else if (k == "length_range") c.length_range = read_range(x, k);
          else if (k == "nms_bev_iou") c.nms_bev_iou = x.get<double>();
          else if (k == "fit_area_slack") c.fit_area_slack = x.get<double>();
          else if (k == "min_roi_points") c.min_roi_points = x.get<std::size_t>();
          else if (k == "classes") c.classes = x.get<std::vector<std::string>>();
          else if (k == "max_y") c.max_y = x.is_null() ? std::nullopt : std::optional<double>(x.get<double>());
          else if (k == "eps") c.cluster.eps = x.get<double>();
          else if (k == "min_pts") c.cluster.min_pts = x.get<std::size_t>();
          else return false;
          return true;
        });
      } else if (key == "merge") {
        for_each_key(v, key, [&](const std::string& k, const json& x) {
          if (k != "det3d_score_min") return false;
          cfg.merge.det3d_score_min = x.get<double>();
          return true;
        });
      } else if (key == "disturb") {
        for_each_key(v, key, [&](const std::string& k, const json& x) {
          if (k == "p") {
            cfg.disturb.p = x.get<double>();
          } else if (k == "groups") {
            cfg.disturb.groups.clear();
            for (const auto& g : x.get<std::vector<std::string>>()) cfg.disturb.groups.push_back(parse_label_group(g));
          } else {
            return false;
          }
          return true;
        });
      } else if (key == "eval") {
        for_each_key(v, key, [&](const std::string& k, const json& x) {
          if (k == "iou_min") cfg.eval.iou_min = x.get<double>();
          else if (k == "space") cfg.eval.space = parse_space(x.get<std::string>());
          else if (k == "class") cfg.eval.cls = x.get<std::string>();
          else if (k == "dontcare_overlap") cfg.eval.dontcare_overlap = x.get<double>();
          else if (k == "sweep") cfg.eval_sweep = x.get<std::vector<double>>();
          else return false;
          return true;
        });
      } else if (key == "ap") {
        for_each_key(v, key, [&](const std::string& k, const json& x) {
          if (k == "iou_min") cfg.ap.iou_min = x.get<double>();
          else if (k == "class") cfg.ap.cls = x.get<std::string>();
          else if (k == "ap11") cfg.ap.ap11 = x.get<bool>();
          else return false;
          return true;
        });
      } else if (key == "synth") {
        for_each_key(v, key, [&](const std::string& k, const json& x) {
          auto& s = cfg.synth;
          if (k == "frames") cfg.synth_frames = x.get<std::size_t>();
          else if (k == "n_objects") s.n_objects = x.get<std::size_t>();
          else if (k == "h_range") s.h_range = read_range(x, k);
          else if (k == "w_range") s.w_range = read_range(x, k);
          else if (k == "l_range") s.l_range = read_range(x, k);
          else if (k == "x_range") s.x_range = read_range(x, k);
          else if (k == "z_range") s.z_range = read_range(x, k);
          else if (k == "points_per_face") s.points_per_face = x.get<std::size_t>();
          else if (k == "clutter_points") s.clutter_points = x.get<std::size_t>();
          else if (k == "noise_sigma") s.noise_sigma = x.get<double>();
          else if (k == "min_visible_faces") s.min_visible_faces = x.get<std::size_t>();
          else if (k == "max_visible_faces") s.max_visible_faces = x.get<std::size_t>();
          else return false;
          return true;
        });
      } else {
        return false;
      }
      return true;
    });
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) { return parse_run_config(read_file(path)); }

std::string run_config_to_json(const RunConfig& cfg) {
  json groups = json::array();
  for (auto g : cfg.disturb.groups) groups.push_back(to_string(g));
  const auto& lc = cfg.lowcost;
  json doc{
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"lowcost",
       {{"det2d_score_min", lc.det2d_score_min},
        {"width_range", range_json(lc.width_range)},
        {"length_range", range_json(lc.length_range)},
        {"nms_bev_iou", lc.nms_bev_iou},
        {"fit_area_slack", lc.fit_area_slack},
        {"min_roi_points", lc.min_roi_points},
        {"classes", lc.classes},
        {"max_y", lc.max_y ? json(*lc.max_y) : json(nullptr)},
        {"eps", lc.cluster.eps},
        {"min_pts", lc.cluster.min_pts}}},
      {"merge", {{"det3d_score_min", cfg.merge.det3d_score_min}}},
      {"disturb", {{"p", cfg.disturb.p}, {"groups", groups}}},
      {"eval",
       {{"iou_min", cfg.eval.iou_min},
        {"space", to_string(cfg.eval.space)},
        {"class", cfg.eval.cls},
        {"dontcare_overlap", cfg.eval.dontcare_overlap},
        {"sweep", cfg.eval_sweep}}},
      {"ap", {{"iou_min", cfg.ap.iou_min}, {"class", cfg.ap.cls}, {"ap11", cfg.ap.ap11}}},
      {"synth",
       {{"frames", cfg.synth_frames},
        {"n_objects", cfg.synth.n_objects},
        {"h_range", range_json(cfg.synth.h_range)},
        {"w_range", range_json(cfg.synth.w_range)},
        {"l_range", range_json(cfg.synth.l_range)},
        {"x_range", range_json(cfg.synth.x_range)},
        {"z_range", range_json(cfg.synth.z_range)},
        {"points_per_face", cfg.synth.points_per_face},
        {"clutter_points", cfg.synth.clutter_points},
        {"noise_sigma", cfg.synth.noise_sigma},
        {"min_visible_faces", cfg.synth.min_visible_faces},
        {"max_visible_faces", cfg.synth.max_visible_faces}}},
  };
  return doc.dump(2) + "\n";
}

std::uint64_t frame_stream_key(std::string_view frame_id) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : frame_id) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::string> list_frame_ids(const fs::path& dir) {
  require_dir(dir);
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

LowcostSummary cmd_lowcost(const fs::path& manifest_path, const fs::path& out_dir, const RunConfig& cfg) {
  cfg.validate();
  const DatasetManifest manifest = load_manifest(manifest_path);
  for (const auto& f : manifest.frames) {
    require_file(f.velodyne, f.frame_id, "velodyne");
    require_file(f.calib, f.frame_id, "calib");
    require_file(f.detections, f.frame_id, "detections");
  }
  fs::create_directories(out_dir);
  spdlog::info("lowcost: {} frames, {} jobs", manifest.frames.size(), cfg.jobs);

  const std::size_t n = manifest.frames.size();
  std::vector<FrameReport> reports(n);
  std::vector<std::string> errors(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const FrameEntry& f = manifest.frames[i];
    try {
      const CalibBundle calib = parse_calib(read_file(f.calib));
      const PointCloud cloud = parse_velodyne(read_file(f.velodyne));
      const auto detections = parse_detections(read_file(f.detections));
      LowCostResult result = low_cost_label_frame(cloud, calib, detections, cfg.lowcost);
      result.report.frame_id = f.frame_id;
      std::vector<LabelRecord> records;
      records.reserve(result.labels.size());
      for (const auto& pl : result.labels) records.push_back(to_label_record(pl));
      write_file(out_dir / (f.frame_id + ".txt"), write_label_file(records));
      reports[i] = std::move(result.report);
    } catch (const std::exception& e) {
      reports[i].frame_id = f.frame_id;
      errors[i] = e.what();
    }
  });

  LowcostSummary summary;
  summary.totals.frame_id = "total";
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      spdlog::error("frame {}: {}", manifest.frames[i].frame_id, errors[i]);
      summary.errors.push_back(manifest.frames[i].frame_id + ": " + errors[i]);
    }
    accumulate(summary.totals, reports[i]);
    summary.frames.push_back(std::move(reports[i]));
  }
  write_file(out_dir / "report.json", lowcost_report_json(summary));
  return summary;
}

std::string lowcost_report_json(const LowcostSummary& summary) {
  json frames = json::array();
  for (const auto& r : summary.frames) frames.push_back(frame_report_json(r));
  json doc{{"complete", summary.complete()},
           {"errors", summary.errors},
           {"frames", std::move(frames)},
           {"totals", frame_report_json(summary.totals)}};
  return doc.dump(2) + "\n";
}

AssembleResult cmd_merge(const fs::path& labeled_manifest, const fs::path& unlabeled_manifest,
                         const fs::path& det3d_dir, const fs::path& out_dir, const RunConfig& cfg) {
  cfg.validate();
  const DatasetManifest labeled = load_manifest(labeled_manifest);
  const DatasetManifest unlabeled = load_manifest(unlabeled_manifest);
  require_dir(det3d_dir);
  std::map<std::string, fs::path> det3d;
  for (const auto& f : unlabeled.frames) {
    const fs::path p = det3d_dir / (f.frame_id + ".txt");
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) det3d[f.frame_id] = p;
  }
  AssembleResult result = high_acc_assemble(labeled, unlabeled, det3d, cfg.merge, out_dir / "pseudo_labels");
  write_file(out_dir / "merged_manifest.json", write_manifest(result.merged, out_dir));
  spdlog::info("merge: {} frames, {} boxes kept, {} dropped", result.merged.frames.size(), result.n_kept,
               result.n_dropped);
  return result;
}

std::size_t cmd_disturb(const fs::path& labels_dir, const fs::path& out_dir, const RunConfig& cfg) {
  cfg.validate();
  const auto ids = list_frame_ids(labels_dir);
  std::error_code ec;
  if (fs::exists(out_dir, ec) && fs::equivalent(labels_dir, out_dir, ec))
    bad_config("disturb output directory must differ from the input directory");

  DisturbConfig dc = cfg.disturb;
  dc.seed = cfg.seed;
  std::vector<std::string> outputs;
  outputs.reserve(ids.size());
  for (const auto& id : ids) {
    const auto records = load_labels(labels_dir / (id + ".txt"));
    outputs.push_back(write_label_file(disturb_labels(records, dc, frame_stream_key(id))));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) write_file(out_dir / (ids[i] + ".txt"), outputs[i]);
  return ids.size();
}

EvalSummary cmd_eval(const fs::path& pseudo_dir, const fs::path& gt_dir, const RunConfig& cfg, bool with_ap) {
  cfg.validate();
  const auto pseudo_ids = list_frame_ids(pseudo_dir);
  const auto gt_ids = list_frame_ids(gt_dir);
  check_same_frames(pseudo_ids, gt_ids);

  EvalSummary summary;
  summary.n_frames = pseudo_ids.size();
  for (double t : cfg.eval_sweep) summary.sweep.emplace_back(t, MatchReport{});

  MreAccumulator mre;
  std::vector<FrameLabels> frames;
  for (const auto& id : pseudo_ids) {
    FrameLabels fl{load_labels(pseudo_dir / (id + ".txt")), load_labels(gt_dir / (id + ".txt"))};
    const MatchReport r = match_labels(fl.detections, fl.gt, cfg.eval);
    summary.totals.tp += r.tp;
    summary.totals.fp += r.fp;
    summary.totals.fn += r.fn;
    summary.totals.absorbed += r.absorbed;
    for (const auto& m : r.matches) mre.add(fl.detections[m.pseudo_idx], fl.gt[m.gt_idx]);
    for (auto& [t, acc] : summary.sweep) {
      MatchOptions opts = cfg.eval;
      opts.iou_min = t;
      const MatchReport s = match_labels(fl.detections, fl.gt, opts);
      acc.tp += s.tp;
      acc.fp += s.fp;
      acc.fn += s.fn;
      acc.absorbed += s.absorbed;
    }
    if (with_ap) frames.push_back(std::move(fl));
  }
  if (mre.count() > 0) summary.mre = mre.finish();
  if (with_ap) {
    ApOptions opts = cfg.ap;
    opts.iou_min = 0.7;
    summary.ap_strict = ap40(frames, opts);
    opts.iou_min = 0.5;
    summary.ap_loose = ap40(frames, opts);
  }
  return summary;
}

std::string eval_report_json(const EvalSummary& s, const RunConfig& cfg) {
  json doc{{"frames", s.n_frames},
           {"class", cfg.eval.cls},
           {"space", to_string(cfg.eval.space)},
           {"iou_min", cfg.eval.iou_min},
           {"tp", s.totals.tp},
           {"fp", s.totals.fp},
           {"fn", s.totals.fn},
           {"absorbed_dontcare", s.totals.absorbed}};
  if (s.mre) {
    doc["matches"] = s.mre->n;
    doc["loc_mre"] = s.mre->loc;
    doc["dim_mre"] = s.mre->dim;
    doc["orient_mre"] = s.mre->orient;
    doc["orient_abs_err_rad"] = s.mre->orient_abs_rad;
  } else {
    doc["matches"] = 0;
    doc["loc_mre"] = nullptr;
    doc["dim_mre"] = nullptr;
    doc["orient_mre"] = nullptr;
    doc["orient_abs_err_rad"] = nullptr;
  }
  json sweep = json::array();
  for (const auto& [t, r] : s.sweep) sweep.push_back({{"iou_min", t}, {"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}});
  doc["sweep"] = std::move(sweep);
  if (s.ap_strict && s.ap_loose) {
    json rows = ap_rows_json(*s.ap_strict);
    for (auto& row : ap_rows_json(*s.ap_loose)) rows.push_back(std::move(row));
    doc["ap40"] = std::move(rows);
  }
  return doc.dump(2) + "\n";
}

std::string eval_table(const EvalSummary& s) {
  std::string out = fmt::format("{:>8} {:>8} {:>8}  {:<22} {:<22} {:<10}\n", "TP", "FP", "FN", "Loc. MRE (x/y/z)",
                                "Dim. MRE (h/w/l)", "Orient. MRE");
  if (s.mre) {
    const auto& m = *s.mre;
    out += fmt::format("{:>8} {:>8} {:>8}  {:<22} {:<22} {:<10}\n", s.totals.tp, s.totals.fp, s.totals.fn,
                       percent(m.loc[0]) + "/" + percent(m.loc[1]) + "/" + percent(m.loc[2]),
                       percent(m.dim[0]) + "/" + percent(m.dim[1]) + "/" + percent(m.dim[2]), percent(m.orient));
  } else {
    out += fmt::format("{:>8} {:>8} {:>8}  {:<22} {:<22} {:<10}\n", s.totals.tp, s.totals.fp, s.totals.fn, "-", "-", "-");
  }
  for (const auto* ap : {&s.ap_strict, &s.ap_loose}) {
    if (*ap) out += ap_table(**ap, ApOptions{});
  }
  return out;
}

ApReport cmd_ap(const fs::path& pred_dir, const fs::path& gt_dir, const RunConfig& cfg) {
  cfg.validate();
  const auto pred_ids = list_frame_ids(pred_dir);
  const auto gt_ids = list_frame_ids(gt_dir);
  check_same_frames(pred_ids, gt_ids);
  std::vector<FrameLabels> frames;
  frames.reserve(pred_ids.size());
  for (const auto& id : pred_ids)
    frames.push_back({load_labels(pred_dir / (id + ".txt")), load_labels(gt_dir / (id + ".txt"))});
  return ap40(frames, cfg.ap);
}

std::string ap_report_json(const ApReport& report, const ApOptions& opts) {
  json doc{{"class", opts.cls}, {"metric", opts.ap11 ? "AP11" : "AP40"}, {"rows", ap_rows_json(report)}};
  return doc.dump(2) + "\n";
}

std::string ap_curves_csv(const ApReport& report) {
  std::string out = "recall,easy_bev,moderate_bev,hard_bev,easy_3d,moderate_3d,hard_3d\n";
  const std::size_t n = report.bev[0].recall.size();
  for (std::size_t j = 0; j < n; ++j) {
    out += fmt::format("{:.4f}", report.bev[0].recall[j]);
    for (const auto* curves : {&report.bev, &report.box3d})
      for (const auto& c : *curves) out += fmt::format(",{:.6f}", c.precision[j]);
    out += '\n';
  }
  return out;
}

std::string ap_table(const ApReport& report, const ApOptions& opts) {
  const char* metric = opts.ap11 ? "R11" : "R40";
  std::string out = fmt::format("{} IoU={:.2f}|{}   {:>8} {:>8} {:>8}\n", opts.cls, report.iou_min, metric, "Easy",
                                "Mod.", "Hard");
  out += fmt::format("  AP_BEV            {:8.2f} {:8.2f} {:8.2f}\n", report.bev[0].ap, report.bev[1].ap,
                     report.bev[2].ap);
  out += fmt::format("  AP_3D             {:8.2f} {:8.2f} {:8.2f}\n", report.box3d[0].ap, report.box3d[1].ap,
                     report.box3d[2].ap);
  return out;
}

DatasetManifest cmd_synth(const fs::path& out_dir, const RunConfig& cfg) {
  cfg.validate();
  DatasetManifest manifest;
  manifest.sequence_id = "synthetic";
  for (std::size_t i = 0; i < cfg.synth_frames; ++i) {
    SceneParams params = cfg.synth;
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 gen(seq);
    params.seed = gen();
    const std::string id = fmt::format("{:06d}", i);
    manifest.frames.push_back(dump_scene(generate_scene(params), out_dir, id));
  }
  write_file(out_dir / "manifest.json", write_manifest(manifest, out_dir));
  return manifest;
}

void cmd_render_bev(const std::optional<fs::path>& cloud, const std::optional<fs::path>& calib,
                    const std::vector<fs::path>& label_files, const fs::path& out_svg) {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::vector<Box3D>> sets;
  if (cloud) {
    const CalibBundle c = calib ? parse_calib(read_file(*calib)) : CalibBundle{};
    points = lidar_to_rect(parse_velodyne(read_file(*cloud)), c);
  }
  for (const auto& path : label_files) {
    std::vector<Box3D> boxes;
    for (const auto& r : load_labels(path))
      if (!r.is_dont_care()) boxes.push_back(box_from_label(r));
    sets.push_back(std::move(boxes));
  }
  write_file(out_svg, render_bev_svg(points, sets));
}

}  // namespace lpcg::cli
