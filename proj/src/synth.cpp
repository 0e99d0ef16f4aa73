#include "lpcg/synth.hpp"

#include "lpcg/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace lpcg {
namespace {

struct Face {
  Vec2 a, b;
  double facing = 0.0;  // cosine between outward normal and direction to sensor
};

std::vector<Face> facing_faces(const Box3D& box, std::size_t max_faces) {
  const auto c = box.bev().corners();
  std::vector<Face> faces;
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec2 a = c[k];
    const Vec2 b = c[(k + 1) % 4];
    const Vec2 e{b.x - a.x, b.z - a.z};
    const double len = std::hypot(e.x, e.z);
    const Vec2 normal{e.z / len, -e.x / len};
    const Vec2 mid{0.5 * (a.x + b.x), 0.5 * (a.z + b.z)};
    const double dist = std::hypot(mid.x, mid.z);
    const double facing = -(normal.x * mid.x + normal.z * mid.z) / dist;
    if (facing > 0.0) faces.push_back({a, b, facing});
  }
  std::stable_sort(faces.begin(), faces.end(), [](const Face& f, const Face& g) { return f.facing > g.facing; });
  if (faces.size() > max_faces) faces.resize(max_faces);
  return faces;
}

Detection2D project_box(const Box3D& box, const Matrix34d& P) {
  Detection2D det;
  det.cls = "Car";
  det.score = 1.0;
  bool first = true;
  for (const auto& corner : box.corners()) {
    const ImagePoint ip = project_to_image(corner, P);
    if (first) {
      det.bbox2d = {ip.u, ip.v, ip.u, ip.v};
      first = false;
    }
    det.bbox2d.x1 = std::min(det.bbox2d.x1, ip.u);
    det.bbox2d.y1 = std::min(det.bbox2d.y1, ip.v);
    det.bbox2d.x2 = std::max(det.bbox2d.x2, ip.u);
    det.bbox2d.y2 = std::max(det.bbox2d.y2, ip.v);
  }
  return det;
}

bool boxes_overlap(const BBox2D& a, const BBox2D& b) {
  return a.x1 <= b.x2 && b.x1 <= a.x2 && a.y1 <= b.y2 && b.y1 <= a.y2;
}

double draw(std::mt19937_64& gen, const Range& r) {
  if (r.min == r.max) return r.min;
  return std::uniform_real_distribution<double>(r.min, r.max)(gen);
}

}  // namespace

void SceneParams::validate() const {
  for (const Range* r : {&h_range, &w_range, &l_range, &yaw_range, &x_range, &z_range}) {
    if (!(r->min <= r->max)) throw Error(ErrorCode::kInvalidConfig, "scene sampler range is empty");
  }
  if (!(z_range.min > 0.0)) throw Error(ErrorCode::kInvalidConfig, "objects must be placed in front of the camera");
  if (!(h_range.min > 0.0 && w_range.min > 0.0 && l_range.min > 0.0))
    throw Error(ErrorCode::kInvalidConfig, "object dimensions must be positive");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "noise_sigma must be >= 0");
  if (min_visible_faces > max_visible_faces)
    throw Error(ErrorCode::kInvalidConfig, "min_visible_faces exceeds max_visible_faces");
}

CalibBundle canonical_calib() {
  CalibBundle calib;
  calib.P2 << 700.0, 0.0, 600.0, 0.0,  //
      0.0, 700.0, 180.0, 0.0,          //
      0.0, 0.0, 1.0, 0.0;
  calib.R0_rect.setIdentity();
  calib.Tr_velo_to_cam.setIdentity();
  return calib;
}

SyntheticScene generate_scene(const SceneParams& params) {
  params.validate();
  std::mt19937_64 gen(params.seed);
  SyntheticScene scene;
  scene.calib = canonical_calib();

  std::vector<std::vector<Face>> faces;
  for (std::size_t obj = 0; obj < params.n_objects; ++obj) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
      Box3D box;
      box.h = draw(gen, params.h_range);
      box.w = draw(gen, params.w_range);
      box.l = draw(gen, params.l_range);
      box.ry = canonical_axis_angle(draw(gen, params.yaw_range));
      box.loc = {draw(gen, params.x_range), params.ground_y, draw(gen, params.z_range)};
      box.score = 1.0;

      const auto corners = box.corners();
      if (std::any_of(corners.begin(), corners.end(), [](const Eigen::Vector3d& c) { return c.z() <= 0.5; }))
        continue;
      auto visible = facing_faces(box, params.max_visible_faces);
      if (visible.size() < params.min_visible_faces) continue;

      BevRect grown = box.bev();
      grown.length += 2.0 * params.clutter_margin;
      grown.width += 2.0 * params.clutter_margin;
      const Detection2D det = project_box(box, scene.calib.P2);
      bool clash = false;
      for (std::size_t k = 0; k < scene.gt.size() && !clash; ++k) {
        clash = bev_intersection_area(grown, scene.gt[k].bev()) > 0.0 ||
                boxes_overlap(det.bbox2d, scene.detections[k].bbox2d);
      }
      if (clash) continue;

      scene.gt.push_back(box);
      scene.detections.push_back(det);
      scene.visible_faces.push_back(visible.size());
      faces.push_back(std::move(visible));
      placed = true;
    }
    if (!placed)
      throw Error(ErrorCode::kPlacementFailed,
                  fmt::format("object {} not placed after {} attempts", obj, params.max_attempts));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, params.noise_sigma > 0.0 ? params.noise_sigma : 1.0);
  auto emit = [&](Eigen::Vector3d p, int owner) {
    if (params.noise_sigma > 0.0) {
      const double n = std::clamp(noise(gen), -3.0 * params.noise_sigma, 3.0 * params.noise_sigma);
      p += n * p.normalized();
    }
    scene.cloud.points.push_back(
        {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()), static_cast<float>(unit(gen))});
    scene.point_owner.push_back(owner);
  };

  for (std::size_t obj = 0; obj < scene.gt.size(); ++obj) {
    const Box3D& box = scene.gt[obj];
    for (const Face& f : faces[obj]) {
      // Jittered strata along the face, like a scanner's regular azimuth
      // steps; height is free.
      const double strata = static_cast<double>(params.points_per_face);
      for (std::size_t i = 0; i < params.points_per_face; ++i) {
        const double t = (static_cast<double>(i) + unit(gen)) / strata;
        const double s = unit(gen);
        const Eigen::Vector3d p(f.a.x + t * (f.b.x - f.a.x), box.loc.y() - s * box.h, f.a.z + t * (f.b.z - f.a.z));
        emit(p, static_cast<int>(obj));
      }
    }
  }

  const Range cx{params.x_range.min - 5.0, params.x_range.max + 5.0};
  const Range cz{std::max(1.0, params.z_range.min - 3.0), params.z_range.max + 5.0};
  const Range cy{params.ground_y - 2.5, params.ground_y};
  for (std::size_t i = 0; i < params.clutter_points; ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const Eigen::Vector3d p(draw(gen, cx), draw(gen, cy), draw(gen, cz));
      const Vec2 bev{p.x(), p.z()};
      const bool near_object = std::any_of(scene.gt.begin(), scene.gt.end(), [&](const Box3D& b) {
        return signed_distance_inside(b.bev(), bev) > -params.clutter_margin;
      });
      if (near_object) continue;
      emit(p, -1);
      break;
    }
  }
  return scene;
}

std::vector<LabelRecord> ground_truth_records(const SyntheticScene& scene) {
  std::vector<LabelRecord> out;
  for (std::size_t i = 0; i < scene.gt.size(); ++i) {
    PseudoLabel pl;
    pl.box = scene.gt[i];
    pl.cls = "Car";
    pl.bbox2d = scene.detections[i].bbox2d;
    LabelRecord r = to_label_record(pl);
    r.score.reset();
    out.push_back(std::move(r));
  }
  return out;
}

FrameEntry dump_scene(const SyntheticScene& scene, const std::filesystem::path& root, const std::string& frame_id) {
  FrameEntry f;
  f.frame_id = frame_id;
  f.has_annotation = true;
  f.velodyne = root / "velodyne" / (frame_id + ".bin");
  f.calib = root / "calib" / (frame_id + ".txt");
  f.label = root / "label_2" / (frame_id + ".txt");
  f.detections = root / "detections" / (frame_id + ".json");
  write_file(f.velodyne, encode_velodyne(scene.cloud.points));
  write_file(f.calib, write_calib(scene.calib));
  write_file(f.label, write_label_file(ground_truth_records(scene)));
  write_file(f.detections, write_detections(scene.detections));
  return f;
}

RecoveryTrial recovery_trial(const SceneParams& params, const LowCostConfig& cfg) {
  const SyntheticScene scene = generate_scene(params);
  const LowCostResult result = low_cost_label_frame(scene.cloud, scene.calib, scene.detections, cfg);

  RecoveryTrial trial;
  trial.report = result.report;
  for (std::size_t i = 0; i < scene.gt.size(); ++i) {
    const Box3D& g = scene.gt[i];
    ObjectRecovery rec;
    rec.visible_faces = scene.visible_faces[i];
    const PseudoLabel* best = nullptr;
    for (const auto& pl : result.labels) {
      const double iou = bev_iou(pl.box.bev(), g.bev());
      if (iou >= 0.5 && iou > rec.iou) {
        rec.iou = iou;
        best = &pl;
      }
    }
    if (best) {
      const Box3D& p = best->box;
      rec.matched = true;
      rec.yaw_err = std::abs(canonical_axis_angle(p.ry - g.ry));
      rec.center_err = std::hypot(p.loc.x() - g.loc.x(), p.loc.z() - g.loc.z());
      rec.dim_err = std::max({std::abs(p.h - g.h) / g.h, std::abs(p.w - g.w) / g.w, std::abs(p.l - g.l) / g.l});
    }
    trial.objects.push_back(rec);
  }
  return trial;
}

}  // namespace lpcg
