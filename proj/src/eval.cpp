#include "lpcg/eval.hpp"

#include "lpcg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lpcg {
namespace {

constexpr std::array<double, 3> kMinHeight{40.0, 25.0, 25.0};
constexpr std::array<int, 3> kMaxOcclusion{0, 1, 2};
constexpr std::array<double, 3> kMaxTruncation{0.15, 0.30, 0.50};

std::vector<std::size_t> by_score_desc(std::span<const LabelRecord> records, std::span<const std::size_t> subset) {
  std::vector<std::size_t> order(subset.begin(), subset.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].score.value_or(1.0) > records[b].score.value_or(1.0);
  });
  return order;
}

double intersection_over_first(const BBox2D& a, const BBox2D& b) {
  const double area = a.area();
  if (area <= 0.0) return 0.0;
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h / area;
}

bool inside_dont_care(const LabelRecord& det, std::span<const LabelRecord> gt, double min_overlap) {
  return std::any_of(gt.begin(), gt.end(), [&](const LabelRecord& g) {
    return g.is_dont_care() && intersection_over_first(det.bbox2d, g.bbox2d) >= min_overlap;
  });
}

bool is_neighbour_class(std::string_view target, std::string_view cls) {
  return (target == "Car" && cls == "Van") || (target == "Pedestrian" && cls == "Person_sitting");
}

}  // namespace

std::string_view to_string(IouSpace space) { return space == IouSpace::kBev ? "bev" : "3d"; }

double box_iou(const Box3D& a, const Box3D& b, IouSpace space) {
  return space == IouSpace::kBev ? bev_iou(a.bev(), b.bev()) : iou_3d(a, b);
}

MatchReport match_labels(std::span<const LabelRecord> pseudo, std::span<const LabelRecord> gt,
                         const MatchOptions& opts) {
  auto relevant = [&](const LabelRecord& r) { return !r.is_dont_care() && (opts.cls.empty() || r.cls == opts.cls); };

  std::vector<std::size_t> preds, gts;
  for (std::size_t i = 0; i < pseudo.size(); ++i)
    if (relevant(pseudo[i])) preds.push_back(i);
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (relevant(gt[i])) gts.push_back(i);

  std::vector<Box3D> gt_boxes(gt.size());
  for (std::size_t g : gts) gt_boxes[g] = box_from_label(gt[g]);
  std::vector<bool> taken(gt.size(), false);

  MatchReport report;
  for (std::size_t p : by_score_desc(pseudo, preds)) {
    const Box3D box = box_from_label(pseudo[p]);
    std::ptrdiff_t best = -1;
    double best_iou = 0.0;
    for (std::size_t g : gts) {
      if (taken[g] || pseudo[p].cls != gt[g].cls) continue;
      const double iou = box_iou(box, gt_boxes[g], opts.space);
      if (iou >= opts.iou_min && (best < 0 || iou > best_iou)) {
        best = static_cast<std::ptrdiff_t>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      report.matches.push_back({p, static_cast<std::size_t>(best), best_iou});
    } else if (inside_dont_care(pseudo[p], gt, opts.dontcare_overlap)) {
      ++report.absorbed;
    } else {
      ++report.fp;
    }
  }
  report.tp = report.matches.size();
  report.fn = gts.size() - report.tp;
  return report;
}

void MreAccumulator::add(const LabelRecord& pred, const LabelRecord& gt) {
  auto rel = [](double p, double g) { return std::abs(p - g) / std::max(std::abs(g), kMreFloor); };
  for (int c = 0; c < 3; ++c) sum_[static_cast<std::size_t>(c)] += rel(pred.loc[c], gt.loc[c]);
  sum_[3] += rel(pred.h, gt.h);
  sum_[4] += rel(pred.w, gt.w);
  sum_[5] += rel(pred.l, gt.l);
  const double dyaw = std::abs(wrap_angle(pred.ry - gt.ry));
  sum_[6] += dyaw / std::max(std::abs(gt.ry), kMreFloor);
  abs_orient_ += dyaw;
  ++n_;
}

MreReport MreAccumulator::finish() const {
  if (n_ == 0) throw Error(ErrorCode::kEmptyMatchSet, "mean relative error needs at least one match");
  const double n = static_cast<double>(n_);
  MreReport r;
  for (std::size_t c = 0; c < 3; ++c) {
    r.loc[c] = sum_[c] / n;
    r.dim[c] = sum_[c + 3] / n;
  }
  r.orient = sum_[6] / n;
  r.orient_abs_rad = abs_orient_ / n;
  r.n = n_;
  return r;
}

MreReport mean_relative_error(const MatchReport& report, std::span<const LabelRecord> pseudo,
                              std::span<const LabelRecord> gt) {
  MreAccumulator acc;
  for (const auto& m : report.matches) acc.add(pseudo[m.pseudo_idx], gt[m.gt_idx]);
  return acc.finish();
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kModerate: return "moderate";
    case Difficulty::kHard: return "hard";
    case Difficulty::kIgnored: return "ignored";
  }
  return "?";
}

Difficulty assign_difficulty(const LabelRecord& r) {
  const double height = r.bbox2d.height();
  for (std::size_t d = 0; d < 3; ++d) {
    if (height >= kMinHeight[d] && r.occlusion <= kMaxOcclusion[d] && r.truncation <= kMaxTruncation[d])
      return static_cast<Difficulty>(d);
  }
  return Difficulty::kIgnored;
}

ApCurve average_precision(std::span<const FrameLabels> frames, Difficulty difficulty, IouSpace space,
                          const ApOptions& opts) {
  const auto level = static_cast<std::size_t>(difficulty);
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> scored;
  ApCurve curve;

  for (const auto& frame : frames) {
    std::vector<std::size_t> valid, ignored;
    for (std::size_t g = 0; g < frame.gt.size(); ++g) {
      const LabelRecord& r = frame.gt[g];
      if (r.cls == opts.cls) {
        (assign_difficulty(r) <= difficulty ? valid : ignored).push_back(g);
      } else if (is_neighbour_class(opts.cls, r.cls)) {
        ignored.push_back(g);
      }
    }
    curve.n_gt += valid.size();

    std::vector<Box3D> gt_boxes(frame.gt.size());
    for (std::size_t g = 0; g < frame.gt.size(); ++g) gt_boxes[g] = box_from_label(frame.gt[g]);

    std::vector<std::size_t> dets;
    for (std::size_t d = 0; d < frame.detections.size(); ++d)
      if (frame.detections[d].cls == opts.cls) dets.push_back(d);

    std::vector<bool> taken(frame.gt.size(), false);
    auto best_of = [&](const Box3D& box, std::span<const std::size_t> pool) {
      std::ptrdiff_t best = -1;
      double best_iou = 0.0;
      for (std::size_t g : pool) {
        if (taken[g]) continue;
        const double iou = box_iou(box, gt_boxes[g], space);
        if (iou >= opts.iou_min && (best < 0 || iou > best_iou)) {
          best = static_cast<std::ptrdiff_t>(g);
          best_iou = iou;
        }
      }
      return best;
    };

    for (std::size_t d : by_score_desc(frame.detections, dets)) {
      const LabelRecord& det = frame.detections[d];
      const Box3D box = box_from_label(det);
      const double score = det.score.value_or(1.0);
      if (auto g = best_of(box, valid); g >= 0) {
        taken[static_cast<std::size_t>(g)] = true;
        scored.push_back({score, true});
        continue;
      }
      if (auto g = best_of(box, ignored); g >= 0) {
        taken[static_cast<std::size_t>(g)] = true;
        continue;
      }
      if (det.bbox2d.height() < kMinHeight[level]) continue;
      if (inside_dont_care(det, frame.gt, 0.5)) continue;
      scored.push_back({score, false});
    }
  }

  const std::size_t n_samples = opts.ap11 ? 11 : 40;
  curve.recall.resize(n_samples);
  curve.precision.assign(n_samples, 0.0);
  for (std::size_t j = 0; j < n_samples; ++j)
    curve.recall[j] = opts.ap11 ? static_cast<double>(j) / 10.0 : static_cast<double>(j + 1) / 40.0;
  if (curve.n_gt == 0) return curve;

  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  std::vector<double> recall(scored.size()), precision(scored.size());
  for (std::size_t k = 0; k < scored.size(); ++k) {
    if (scored[k].tp) ++curve.n_tp;
    else ++curve.n_fp;
    recall[k] = static_cast<double>(curve.n_tp) / static_cast<double>(curve.n_gt);
    precision[k] = static_cast<double>(curve.n_tp) / static_cast<double>(k + 1);
  }
  // Interpolated precision: best precision at any recall >= r.
  for (std::size_t k = scored.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < n_samples; ++j) {
    while (k < scored.size() && recall[k] < curve.recall[j]) ++k;
    if (k < scored.size()) curve.precision[j] = precision[k];
    sum += curve.precision[j];
  }
  curve.ap = 100.0 * sum / static_cast<double>(n_samples);
  return curve;
}

ApReport ap40(std::span<const FrameLabels> frames, const ApOptions& opts) {
  ApReport report;
  report.iou_min = opts.iou_min;
  for (std::size_t d = 0; d < 3; ++d) {
    report.bev[d] = average_precision(frames, static_cast<Difficulty>(d), IouSpace::kBev, opts);
    report.box3d[d] = average_precision(frames, static_cast<Difficulty>(d), IouSpace::k3d, opts);
  }
  return report;
}

}  // namespace lpcg
