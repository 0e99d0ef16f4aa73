#pragma once

#include "lpcg/geom.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace lpcg {

struct BevView {
  double x_min = -40.0;
  double x_max = 40.0;
  double z_min = 0.0;
  double z_max = 80.0;
  double px_per_m = 10.0;

  double to_px_x(double x) const { return (x - x_min) * px_per_m; }
  double to_px_y(double z) const { return (z_max - z) * px_per_m; }
};

// Top-down debug view: points as dots, each box set drawn as outlines in its
// own colour. Output depends only on the inputs.
std::string render_bev_svg(std::span<const Eigen::Vector3d> rect_points, std::span<const std::vector<Box3D>> box_sets,
                           const BevView& view = {});

}  // namespace lpcg
