#pragma once

// Frame transforms, projection, frustum membership and the planar geometry
// behind box fitting: convex hull, minimum-area enclosing rectangle and
// rotated-box overlap.
//
// Conventions: the rectified camera frame has x right, y down, z forward.
// The bird's-eye view (BEV) is the (x, z) plane. Headings follow the KITTI
// `ry` convention, so a heading `a` points along (cos a, -sin a) in (x, z).

#include "lpcg/kitti_io.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace lpcg {

struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};

struct BevRect {
  Vec2 center;
  double length = 0.0;  // extent along the heading
  double width = 0.0;   // extent across the heading
  double yaw = 0.0;     // in [-pi/2, pi/2)

  double area() const { return length * width; }
  // Counter-clockwise in (x, z).
  std::array<Vec2, 4> corners() const;
};

struct Box3D {
  Eigen::Vector3d loc = Eigen::Vector3d::Zero();  // bottom-face centre
  double h = 0.0, w = 0.0, l = 0.0;
  double ry = 0.0;
  double score = 0.0;

  BevRect bev() const;
  // Bottom face first (y = loc.y), then top face, each counter-clockwise in BEV.
  std::array<Eigen::Vector3d, 8> corners() const;
};

Box3D box_from_label(const LabelRecord& record);

// Wraps to [-pi, pi).
double wrap_angle(double a);
// Wraps to [-pi/2, pi/2); headings that differ by pi map to the same value.
double canonical_axis_angle(double a);

// p_rect = R0_rect * (Tr_velo_to_cam * [p; 1]).
std::vector<Eigen::Vector3d> lidar_to_rect(const PointCloud& cloud, const CalibBundle& calib);
Eigen::Vector3d lidar_to_rect(const Eigen::Vector3d& p, const CalibBundle& calib);
Eigen::Vector3d rect_to_lidar(const Eigen::Vector3d& p_rect, const CalibBundle& calib);

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // third homogeneous coordinate before division
};

ImagePoint project_to_image(const Eigen::Vector3d& p_rect, const Matrix34d& P);

bool point_in_polygon(const Pixel& p, std::span<const Pixel> polygon);
bool point_in_box(const Pixel& p, const BBox2D& box);

// Indices of points with positive depth whose projection falls in the
// detection's mask polygon (or its 2D box when there is no mask).
std::vector<std::size_t> frustum_select(std::span<const Eigen::Vector3d> rect_points, const Matrix34d& P,
                                        const Detection2D& det);
std::vector<std::size_t> frustum_select(const PointCloud& cloud, const CalibBundle& calib, const Detection2D& det);

// Andrew's monotone chain. Counter-clockwise, collinear vertices removed.
// Throws EmptyInput on an empty span.
std::vector<Vec2> convex_hull_2d(std::span<const Vec2> points);

double polygon_area(std::span<const Vec2> polygon);

// Minimum-area enclosing rectangle. An optimal rectangle is flush with a hull
// edge, so rotating calipers visit each edge once with three support
// pointers. Equal-area candidates keep the smallest |yaw|.
BevRect min_area_rect(std::span<const Vec2> points);

// Box fitting for surface scans. The hull of an L-shaped scan is a right
// triangle, and rectangles flush with its hypotenuse tie the true box in
// area, so area alone cannot pick the orientation. Among edge-flush
// rectangles within (1 + area_slack) of the minimum area, this keeps the one
// whose sides lie closest to the points. area_slack <= 0 is min_area_rect.
BevRect fit_bev_rect(std::span<const Vec2> points, double area_slack);

// Positive inside, negative outside (distance to the nearest violated side).
double signed_distance_inside(const BevRect& rect, const Vec2& p);

// Intersection of two convex counter-clockwise polygons.
std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

double bev_intersection_area(const BevRect& a, const BevRect& b);
double bev_iou(const BevRect& a, const BevRect& b);
double iou_3d(const Box3D& a, const Box3D& b);

}  // namespace lpcg
