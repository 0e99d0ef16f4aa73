#pragma once

// Pseudo-label quality against annotations (TP/FP/FN and mean relative
// error per box-parameter group) and KITTI-style average precision.

#include "lpcg/geom.hpp"
#include "lpcg/kitti_io.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lpcg {

enum class IouSpace { kBev, k3d };

std::string_view to_string(IouSpace space);
double box_iou(const Box3D& a, const Box3D& b, IouSpace space);

struct MatchOptions {
  double iou_min = 0.5;
  IouSpace space = IouSpace::kBev;
  // Only records of this class take part; empty means every non-DontCare
  // class, with matches restricted to equal classes.
  std::string cls = "Car";
  // An unmatched prediction whose 2D box lies at least this much (intersection
  // over its own area) inside a DontCare region is not a false positive.
  double dontcare_overlap = 0.5;
};

struct Match {
  std::size_t pseudo_idx = 0;
  std::size_t gt_idx = 0;
  double iou = 0.0;
};

struct MatchReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t absorbed = 0;  // unmatched predictions inside DontCare regions
  std::vector<Match> matches;
};

// Greedy in descending prediction score (input order on ties): each
// prediction takes the unmatched ground-truth box with the highest IoU that
// clears `iou_min`.
MatchReport match_labels(std::span<const LabelRecord> pseudo, std::span<const LabelRecord> gt,
                         const MatchOptions& opts = {});

struct MreReport {
  std::array<double, 3> loc{};  // x, y, z
  std::array<double, 3> dim{};  // h, w, l
  double orient = 0.0;
  double orient_abs_rad = 0.0;  // mean |wrapped ry difference|
  std::size_t n = 0;
};

// Relative errors use |gt| floored at this value in the denominator.
inline constexpr double kMreFloor = 1e-3;

class MreAccumulator {
 public:
  void add(const LabelRecord& pred, const LabelRecord& gt);
  std::size_t count() const { return n_; }
  // Throws EmptyMatchSet when nothing was added.
  MreReport finish() const;

 private:
  std::array<double, 7> sum_{};
  double abs_orient_ = 0.0;
  std::size_t n_ = 0;
};

MreReport mean_relative_error(const MatchReport& report, std::span<const LabelRecord> pseudo,
                              std::span<const LabelRecord> gt);

enum class Difficulty { kEasy = 0, kModerate = 1, kHard = 2, kIgnored = 3 };

std::string_view to_string(Difficulty d);

// Easiest bucket whose height, occlusion and truncation limits the record meets.
Difficulty assign_difficulty(const LabelRecord& record);

struct FrameLabels {
  std::vector<LabelRecord> detections;
  std::vector<LabelRecord> gt;
};

struct ApOptions {
  double iou_min = 0.7;
  std::string cls = "Car";
  bool ap11 = false;  // legacy 11-point interpolation instead of R40
};

struct ApCurve {
  double ap = 0.0;                 // percent
  std::vector<double> recall;      // sample points
  std::vector<double> precision;   // interpolated precision at each sample
  std::size_t n_gt = 0;
  std::size_t n_tp = 0;
  std::size_t n_fp = 0;
};

struct ApReport {
  double iou_min = 0.0;
  std::array<ApCurve, 3> bev;   // indexed by Difficulty
  std::array<ApCurve, 3> box3d;
};

ApCurve average_precision(std::span<const FrameLabels> frames, Difficulty difficulty, IouSpace space,
                          const ApOptions& opts);
ApReport ap40(std::span<const FrameLabels> frames, const ApOptions& opts);

}  // namespace lpcg
