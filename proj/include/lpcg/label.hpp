#pragma once

// Pseudo-label producers: geometric labels from LiDAR frustums (low cost
// mode), filtered external 3D detections merged with a labeled split (high
// accuracy mode), and the multiplicative label disturbance used for
// sensitivity studies.

#include "lpcg/cluster.hpp"
#include "lpcg/geom.hpp"
#include "lpcg/kitti_io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lpcg {

struct Range {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const { return v >= min && v <= max; }
};

struct LowCostConfig {
  double det2d_score_min = 0.9;
  Range width_range{1.2, 1.8};
  Range length_range{3.2, 4.2};
  ClusterParams cluster;
  double nms_bev_iou = 0.3;
  // Relative area slack for fit_bev_rect; 0 fits the strict minimum-area
  // rectangle.
  double fit_area_slack = 0.1;
  std::size_t min_roi_points = 1;
  // Matched case-insensitively against detection classes; the spelling here
  // is what gets written to the label file.
  std::vector<std::string> classes{"Car"};
  // Optional ground crop: RoI points with camera-frame y above this value
  // (i.e. lower in the world) are dropped before clustering.
  std::optional<double> max_y;

  void validate() const;
};

struct HighAccConfig {
  double det3d_score_min = 0.7;

  void validate() const;
};

enum class LabelGroup { kLocation, kDimension, kOrientation };

std::string_view to_string(LabelGroup group);
LabelGroup parse_label_group(std::string_view name);

struct DisturbConfig {
  double p = 0.0;
  std::vector<LabelGroup> groups{LabelGroup::kLocation};
  std::uint64_t seed = 0;

  void validate() const;
};

struct FrameReport {
  std::string frame_id;
  std::size_t n_detections = 0;
  std::size_t n_low_score = 0;
  std::size_t n_other_class = 0;
  std::size_t n_skipped_empty = 0;
  std::size_t n_no_cluster = 0;
  std::size_t n_filtered_dims = 0;
  std::size_t n_suppressed = 0;
  std::size_t n_emitted = 0;
};

struct PseudoLabel {
  Box3D box;
  std::string cls;
  BBox2D bbox2d;
  std::size_t detection_index = 0;
  std::vector<Eigen::Vector3d> support;  // cluster points the box was fitted to
};

struct LowCostResult {
  std::vector<PseudoLabel> labels;
  FrameReport report;
};

// Box enclosing `points` (rectified camera frame): BEV rectangle from
// fit_bev_rect, height from the vertical spread, bottom y from the mean
// height plus h/2.
Box3D fit_box(std::span<const Eigen::Vector3d> points, double area_slack = 0.0);

LowCostResult low_cost_label_frame(const PointCloud& cloud, const CalibBundle& calib,
                                   std::span<const Detection2D> detections, const LowCostConfig& cfg);

// Greedy BEV non-maximum suppression; returns kept indices in descending
// score order (input order on ties).
std::vector<std::size_t> bev_nms(std::span<const Box3D> boxes, double iou_threshold);

LabelRecord to_label_record(const PseudoLabel& label);

// Drops records below the score threshold. Records without a score are a
// MalformedDetections error.
std::vector<LabelRecord> filter_detections_3d(std::span<const LabelRecord> detections, const HighAccConfig& cfg);

struct AssembleResult {
  DatasetManifest merged;
  std::size_t n_kept = 0;
  std::size_t n_dropped = 0;
};

// Writes `<pseudo_label_dir>/<frame_id>.txt` for every unlabeled frame and
// returns the union manifest (labeled frames first, file order kept).
AssembleResult high_acc_assemble(const DatasetManifest& labeled, const DatasetManifest& unlabeled,
                                 const std::map<std::string, std::filesystem::path>& det3d_files,
                                 const HighAccConfig& cfg, const std::filesystem::path& pseudo_label_dir);

// Factor (1 + u), u ~ U[-p/2, p/2], drawn from a generator seeded by
// (seed, stream_key, record_index, group, component) so every value is
// independent of processing order.
double disturbance_factor(std::uint64_t seed, std::uint64_t stream_key, std::size_t record_index, LabelGroup group,
                          int component, double p);

// Scales location (x,y,z), dimension (h,w,l) and/or orientation (ry) of every
// non-DontCare record. `stream_key` separates files (e.g. a frame-id hash).
std::vector<LabelRecord> disturb_labels(std::span<const LabelRecord> records, const DisturbConfig& cfg,
                                        std::uint64_t stream_key = 0);

}  // namespace lpcg
