#pragma once

// Synthetic scenes with known boxes, used as an end-to-end oracle for the
// low cost labeling pipeline. Objects emit points only on the vertical
// faces that look towards the sensor, which is enough to reproduce the
// L-shaped and single-face regimes a real scan produces.

#include "lpcg/geom.hpp"
#include "lpcg/kitti_io.hpp"
#include "lpcg/label.hpp"

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

namespace lpcg {

struct SceneParams {
  std::uint64_t seed = 0;
  std::size_t n_objects = 3;

  Range h_range{1.40, 1.70};
  Range w_range{1.40, 1.65};
  Range l_range{3.50, 4.00};
  Range yaw_range{-0.5 * std::numbers::pi, 0.5 * std::numbers::pi};
  Range x_range{-12.0, 12.0};
  Range z_range{8.0, 35.0};
  double ground_y = 1.65;  // camera height above the road

  std::size_t points_per_face = 200;
  std::size_t clutter_points = 150;
  double clutter_margin = 1.0;  // metres kept clear around every object
  double noise_sigma = 0.01;    // range noise, clipped at 3 sigma

  // Faces facing the sensor, ranked by how squarely they face it.
  std::size_t min_visible_faces = 1;
  std::size_t max_visible_faces = 4;

  std::size_t max_attempts = 2000;

  void validate() const;
};

struct SyntheticScene {
  PointCloud cloud;
  CalibBundle calib;
  std::vector<Box3D> gt;
  std::vector<Detection2D> detections;   // one per object, same order as gt
  std::vector<std::size_t> visible_faces;
  std::vector<int> point_owner;          // object index per point, -1 for clutter
};

// Identity rotations, zero translation, f = 700 px, principal point (600, 180).
CalibBundle canonical_calib();

// Throws PlacementFailed when an object cannot be placed within max_attempts.
SyntheticScene generate_scene(const SceneParams& params);

std::vector<LabelRecord> ground_truth_records(const SyntheticScene& scene);

// Writes velodyne/, calib/, label_2/ and detections/ files under `root`.
FrameEntry dump_scene(const SyntheticScene& scene, const std::filesystem::path& root, const std::string& frame_id);

struct ObjectRecovery {
  bool matched = false;
  double iou = 0.0;
  double yaw_err = 0.0;     // radians, heading sign ignored
  double center_err = 0.0;  // metres in BEV
  double dim_err = 0.0;     // worst relative error over h, w, l
  std::size_t visible_faces = 0;
};

struct RecoveryTrial {
  std::vector<ObjectRecovery> objects;
  FrameReport report;
};

RecoveryTrial recovery_trial(const SceneParams& params, const LowCostConfig& cfg);

}  // namespace lpcg
