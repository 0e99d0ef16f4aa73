#include "lpcg/label.hpp"

#include "lpcg/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace lpcg {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kInvalidConfig, fmt::format("{} must be in [0,1], got {}", name, v));
}

void require_range(const Range& r, const char* name) {
  if (!(r.min <= r.max) || !std::isfinite(r.min) || !std::isfinite(r.max))
    throw Error(ErrorCode::kInvalidConfig, fmt::format("{} [{}, {}] is empty", name, r.min, r.max));
}

}  // namespace

void LowCostConfig::validate() const {
  require_unit(det2d_score_min, "det2d_score_min");
  require_unit(nms_bev_iou, "nms_bev_iou");
  if (!(fit_area_slack >= 0.0) || !std::isfinite(fit_area_slack))
    throw Error(ErrorCode::kInvalidConfig, fmt::format("fit_area_slack must be >= 0, got {}", fit_area_slack));
  require_range(width_range, "width_range");
  require_range(length_range, "length_range");
  cluster.validate();
  if (classes.empty()) throw Error(ErrorCode::kInvalidConfig, "classes must not be empty");
}

void HighAccConfig::validate() const { require_unit(det3d_score_min, "det3d_score_min"); }

std::string_view to_string(LabelGroup group) {
  switch (group) {
    case LabelGroup::kLocation: return "location";
    case LabelGroup::kDimension: return "dimension";
    case LabelGroup::kOrientation: return "orientation";
  }
  return "?";
}

LabelGroup parse_label_group(std::string_view name) {
  if (name == "location" || name == "loc") return LabelGroup::kLocation;
  if (name == "dimension" || name == "dim") return LabelGroup::kDimension;
  if (name == "orientation" || name == "orient") return LabelGroup::kOrientation;
  throw Error(ErrorCode::kInvalidConfig, fmt::format("unknown label group '{}'", name));
}

void DisturbConfig::validate() const {
  if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::kInvalidConfig, fmt::format("p must be >= 0, got {}", p));
  if (groups.empty()) throw Error(ErrorCode::kInvalidConfig, "at least one label group is required");
}

Box3D fit_box(std::span<const Eigen::Vector3d> points, double area_slack) {
  if (points.empty()) throw Error(ErrorCode::kEmptyInput, "cannot fit a box to zero points");
  std::vector<Vec2> bev;
  bev.reserve(points.size());
  double y_min = points.front().y(), y_max = points.front().y(), y_sum = 0.0;
  for (const auto& p : points) {
    bev.push_back({p.x(), p.z()});
    y_min = std::min(y_min, p.y());
    y_max = std::max(y_max, p.y());
    y_sum += p.y();
  }
  const BevRect rect = fit_bev_rect(bev, area_slack);

  Box3D box;
  box.h = y_max - y_min;
  box.w = rect.width;
  box.l = rect.length;
  box.ry = rect.yaw;
  const double y_center = y_sum / static_cast<double>(points.size());
  box.loc = {rect.center.x, y_center + 0.5 * box.h, rect.center.z};
  return box;
}

std::vector<std::size_t> bev_nms(std::span<const Box3D> boxes, double iou_threshold) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].score > boxes[b].score; });
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const BevRect rect = boxes[idx].bev();
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return bev_iou(rect, boxes[k].bev()) > iou_threshold;
    });
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

LowCostResult low_cost_label_frame(const PointCloud& cloud, const CalibBundle& calib,
                                   std::span<const Detection2D> detections, const LowCostConfig& cfg) {
  cfg.validate();
  LowCostResult result;
  result.report.n_detections = detections.size();
  if (detections.empty()) return result;

  const std::vector<Eigen::Vector3d> rect_points = lidar_to_rect(cloud, calib);
  std::vector<PseudoLabel> candidates;

  for (std::size_t d = 0; d < detections.size(); ++d) {
    const Detection2D& det = detections[d];
    if (det.score < cfg.det2d_score_min) {
      ++result.report.n_low_score;
      continue;
    }
    const auto cls = std::find_if(cfg.classes.begin(), cfg.classes.end(),
                                  [&](const std::string& c) { return iequals(c, det.cls); });
    if (cls == cfg.classes.end()) {
      ++result.report.n_other_class;
      continue;
    }

    std::vector<Eigen::Vector3d> roi;
    for (std::size_t i : frustum_select(rect_points, calib.P2, det)) {
      if (cfg.max_y && rect_points[i].y() > *cfg.max_y) continue;
      roi.push_back(rect_points[i]);
    }
    if (roi.size() < cfg.min_roi_points || roi.empty()) {
      ++result.report.n_skipped_empty;
      continue;
    }

    const Clustering clustering = dbscan(roi, cfg.cluster);
    std::vector<Eigen::Vector3d> target = largest_cluster(clustering, roi);
    if (target.empty()) {
      ++result.report.n_no_cluster;
      continue;
    }

    Box3D box = fit_box(target, cfg.fit_area_slack);
    if (!cfg.width_range.contains(box.w) || !cfg.length_range.contains(box.l)) {
      ++result.report.n_filtered_dims;
      continue;
    }
    box.score = det.score;
    candidates.push_back({box, *cls, det.bbox2d, d, std::move(target)});
  }

  std::vector<Box3D> boxes;
  boxes.reserve(candidates.size());
  for (const auto& c : candidates) boxes.push_back(c.box);
  std::vector<std::size_t> kept = bev_nms(boxes, cfg.nms_bev_iou);
  // Emit in detection order so output files follow the input layout.
  std::sort(kept.begin(), kept.end());
  result.report.n_suppressed = candidates.size() - kept.size();
  for (std::size_t k : kept) result.labels.push_back(std::move(candidates[k]));
  result.report.n_emitted = result.labels.size();
  return result;
}

LabelRecord to_label_record(const PseudoLabel& label) {
  LabelRecord r;
  r.cls = label.cls;
  r.truncation = 0.0;
  r.occlusion = 0;
  r.alpha = wrap_angle(label.box.ry - std::atan2(label.box.loc.x(), label.box.loc.z()));
  r.bbox2d = label.bbox2d;
  r.h = label.box.h;
  r.w = label.box.w;
  r.l = label.box.l;
  r.loc = label.box.loc;
  r.ry = label.box.ry;
  r.score = label.box.score;
  return r;
}

std::vector<LabelRecord> filter_detections_3d(std::span<const LabelRecord> detections, const HighAccConfig& cfg) {
  cfg.validate();
  std::vector<LabelRecord> kept;
  for (const auto& d : detections) {
    if (d.is_dont_care()) continue;
    if (!d.score) throw Error(ErrorCode::kMalformedDetections, fmt::format("3D detection '{}' has no score", d.cls));
    if (*d.score >= cfg.det3d_score_min) kept.push_back(d);
  }
  return kept;
}

AssembleResult high_acc_assemble(const DatasetManifest& labeled, const DatasetManifest& unlabeled,
                                 const std::map<std::string, std::filesystem::path>& det3d_files,
                                 const HighAccConfig& cfg, const std::filesystem::path& pseudo_label_dir) {
  cfg.validate();
  validate_manifest(labeled);
  validate_manifest(unlabeled);

  std::set<std::string> ids;
  for (const auto& f : labeled.frames) ids.insert(f.frame_id);
  for (const auto& f : unlabeled.frames) {
    if (!ids.insert(f.frame_id).second) throw Error(ErrorCode::kDuplicateFrameId, f.frame_id);
  }

  // Parse everything before the first write.
  std::vector<std::vector<LabelRecord>> kept_per_frame;
  AssembleResult result;
  for (const auto& f : unlabeled.frames) {
    auto it = det3d_files.find(f.frame_id);
    if (it == det3d_files.end()) throw Error(ErrorCode::kMissingDetections, f.frame_id);
    std::string text;
    try {
      text = read_file(it->second);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMissingFile) throw Error(ErrorCode::kMissingDetections, f.frame_id);
      throw;
    }
    const auto detections = parse_label_file(text);
    auto kept = filter_detections_3d(detections, cfg);
    const auto n_scored = static_cast<std::size_t>(
        std::count_if(detections.begin(), detections.end(), [](const LabelRecord& r) { return !r.is_dont_care(); }));
    result.n_kept += kept.size();
    result.n_dropped += n_scored - kept.size();
    kept_per_frame.push_back(std::move(kept));
  }

  result.merged.sequence_id = labeled.sequence_id ? labeled.sequence_id : unlabeled.sequence_id;
  result.merged.frames = labeled.frames;
  for (std::size_t i = 0; i < unlabeled.frames.size(); ++i) {
    FrameEntry f = unlabeled.frames[i];
    f.label = pseudo_label_dir / (f.frame_id + ".txt");
    f.pseudo_label = true;
    write_file(f.label, write_label_file(kept_per_frame[i]));
    result.merged.frames.push_back(std::move(f));
  }
  return result;
}

double disturbance_factor(std::uint64_t seed, std::uint64_t stream_key, std::size_t record_index, LabelGroup group,
                          int component, double p) {
  if (p == 0.0) return 1.0;
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  const auto index = static_cast<std::uint64_t>(record_index);
  std::seed_seq seq{lo(seed),  hi(seed),  lo(stream_key), hi(stream_key), lo(index), hi(index),
                    static_cast<std::uint32_t>(group), static_cast<std::uint32_t>(component)};
  std::mt19937_64 gen(seq);
  std::uniform_real_distribution<double> uniform(-0.5 * p, 0.5 * p);
  return 1.0 + uniform(gen);
}

std::vector<LabelRecord> disturb_labels(std::span<const LabelRecord> records, const DisturbConfig& cfg,
                                        std::uint64_t stream_key) {
  cfg.validate();
  std::vector<LabelRecord> out(records.begin(), records.end());
  if (cfg.p == 0.0) return out;

  const std::set<LabelGroup> groups(cfg.groups.begin(), cfg.groups.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    LabelRecord& r = out[i];
    if (r.is_dont_care()) continue;
    auto factor = [&](LabelGroup g, int c) { return disturbance_factor(cfg.seed, stream_key, i, g, c, cfg.p); };
    if (groups.contains(LabelGroup::kLocation)) {
      for (int c = 0; c < 3; ++c) r.loc[c] *= factor(LabelGroup::kLocation, c);
    }
    if (groups.contains(LabelGroup::kDimension)) {
      r.h *= factor(LabelGroup::kDimension, 0);
      r.w *= factor(LabelGroup::kDimension, 1);
      r.l *= factor(LabelGroup::kDimension, 2);
    }
    if (groups.contains(LabelGroup::kOrientation)) {
      r.ry = wrap_angle(r.ry * factor(LabelGroup::kOrientation, 0));
    }
  }
  return out;
}

}  // namespace lpcg
