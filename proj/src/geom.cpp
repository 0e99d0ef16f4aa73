#include "lpcg/geom.hpp"

#include "lpcg/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace lpcg {
namespace {

constexpr double kPi = std::numbers::pi;

double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.z * b.z; }
Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.z - b.z}; }
Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.z + b.z}; }
Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.z}; }

// > 0 when o->a->b turns counter-clockwise.
double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

Vec2 heading_dir(double yaw) { return {std::cos(yaw), -std::sin(yaw)}; }
Vec2 left_normal(const Vec2& d) { return {-d.z, d.x}; }
double heading_of(const Vec2& d) { return std::atan2(-d.z, d.x); }

BevRect rect_from_extents(const Vec2& d, double min_d, double max_d, double min_n, double max_n) {
  const Vec2 n = left_normal(d);
  BevRect rect;
  rect.center = 0.5 * (min_d + max_d) * d + 0.5 * (min_n + max_n) * n;
  const double along = max_d - min_d;
  const double across = max_n - min_n;
  if (along >= across) {
    rect.length = along;
    rect.width = across;
    rect.yaw = canonical_axis_angle(heading_of(d));
  } else {
    rect.length = across;
    rect.width = along;
    rect.yaw = canonical_axis_angle(heading_of(n));
  }
  return rect;
}

}  // namespace

std::array<Vec2, 4> BevRect::corners() const {
  const Vec2 d = heading_dir(yaw);
  const Vec2 n = left_normal(d);
  const Vec2 half_l = 0.5 * length * d;
  const Vec2 half_w = 0.5 * width * n;
  return {center - half_l - half_w, center + half_l - half_w, center + half_l + half_w,
          center - half_l + half_w};
}

BevRect Box3D::bev() const {
  BevRect rect;
  rect.center = {loc.x(), loc.z()};
  rect.length = l;
  rect.width = w;
  rect.yaw = ry;
  return rect;
}

std::array<Eigen::Vector3d, 8> Box3D::corners() const {
  const auto base = bev().corners();
  std::array<Eigen::Vector3d, 8> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {base[i].x, loc.y(), base[i].z};
    out[i + 4] = {base[i].x, loc.y() - h, base[i].z};
  }
  return out;
}

Box3D box_from_label(const LabelRecord& r) {
  Box3D box;
  box.loc = r.loc;
  box.h = r.h;
  box.w = r.w;
  box.l = r.l;
  box.ry = r.ry;
  box.score = r.score.value_or(1.0);
  return box;
}

double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0) w += 2.0 * kPi;
  if (w >= 2.0 * kPi) w -= 2.0 * kPi;
  return w - kPi;
}

double canonical_axis_angle(double a) {
  double w = std::fmod(a + 0.5 * kPi, kPi);
  if (w < 0) w += kPi;
  if (w >= kPi) w -= kPi;
  return w - 0.5 * kPi;
}

Eigen::Vector3d lidar_to_rect(const Eigen::Vector3d& p, const CalibBundle& calib) {
  const Eigen::Vector3d cam = calib.Tr_velo_to_cam.leftCols<3>() * p + calib.Tr_velo_to_cam.col(3);
  return calib.R0_rect * cam;
}

std::vector<Eigen::Vector3d> lidar_to_rect(const PointCloud& cloud, const CalibBundle& calib) {
  const Eigen::Matrix3d rot = calib.R0_rect * calib.Tr_velo_to_cam.leftCols<3>();
  const Eigen::Vector3d trans = calib.R0_rect * calib.Tr_velo_to_cam.col(3);
  std::vector<Eigen::Vector3d> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points) out.push_back(rot * Eigen::Vector3d(p.x, p.y, p.z) + trans);
  return out;
}

Eigen::Vector3d rect_to_lidar(const Eigen::Vector3d& p_rect, const CalibBundle& calib) {
  const Eigen::Vector3d cam = calib.R0_rect.inverse() * p_rect;
  return calib.Tr_velo_to_cam.leftCols<3>().inverse() * (cam - calib.Tr_velo_to_cam.col(3));
}

ImagePoint project_to_image(const Eigen::Vector3d& p_rect, const Matrix34d& P) {
  const Eigen::Vector3d h = P.leftCols<3>() * p_rect + P.col(3);
  return {h.x() / h.z(), h.y() / h.z(), h.z()};
}

bool point_in_box(const Pixel& p, const BBox2D& box) {
  return p.u >= box.x1 && p.u <= box.x2 && p.v >= box.y1 && p.v <= box.y2;
}

bool point_in_polygon(const Pixel& p, std::span<const Pixel> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Pixel& a = polygon[i];
    const Pixel& b = polygon[j];
    // Points on an edge count as inside.
    const double cr = (b.u - a.u) * (p.v - a.v) - (b.v - a.v) * (p.u - a.u);
    if (cr == 0.0 && p.u >= std::min(a.u, b.u) && p.u <= std::max(a.u, b.u) && p.v >= std::min(a.v, b.v) &&
        p.v <= std::max(a.v, b.v))
      return true;
    if ((a.v > p.v) != (b.v > p.v)) {
      const double u_cross = a.u + (p.v - a.v) * (b.u - a.u) / (b.v - a.v);
      if (p.u < u_cross) inside = !inside;
    }
  }
  return inside;
}

std::vector<std::size_t> frustum_select(std::span<const Eigen::Vector3d> rect_points, const Matrix34d& P,
                                        const Detection2D& det) {
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < rect_points.size(); ++i) {
    const ImagePoint ip = project_to_image(rect_points[i], P);
    if (!(ip.depth > 0.0)) continue;
    const Pixel px{ip.u, ip.v};
    const bool inside = det.mask ? point_in_polygon(px, *det.mask) : point_in_box(px, det.bbox2d);
    if (inside) selected.push_back(i);
  }
  return selected;
}

std::vector<std::size_t> frustum_select(const PointCloud& cloud, const CalibBundle& calib, const Detection2D& det) {
  const auto rect = lidar_to_rect(cloud, calib);
  return frustum_select(rect, calib.P2, det);
}

std::vector<Vec2> convex_hull_2d(std::span<const Vec2> points) {
  if (points.empty()) throw Error(ErrorCode::kEmptyInput, "convex hull of zero points");
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.z < b.z); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.z == b.z; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;

  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(std::span<const Vec2> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0, n = polygon.size(); i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    twice += a.x * b.z - a.z * b.x;
  }
  return 0.5 * twice;
}

namespace {

// One rectangle per hull edge, flush with that edge. Support pointers are
// unwrapped indices that only move forward, so the sweep is O(n).
std::vector<BevRect> caliper_candidates(const std::vector<Vec2>& hull) {
  const std::size_t n = hull.size();
  auto at = [&](std::size_t idx) -> const Vec2& { return hull[idx % n]; };
  std::vector<BevRect> out;
  out.reserve(n);
  std::size_t right = 1, top = 1, left = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = at(i + 1) - at(i);
    const double len = std::sqrt(dot(e, e));
    const Vec2 d{e.x / len, e.z / len};
    const Vec2 nrm = left_normal(d);

    right = std::max(right, i + 1);
    while (right < i + n && dot(at(right + 1), d) > dot(at(right), d)) ++right;
    top = std::max(top, right);
    while (top < i + n && dot(at(top + 1), nrm) > dot(at(top), nrm)) ++top;
    left = std::max(left, top);
    while (left < i + n && dot(at(left + 1), d) < dot(at(left), d)) ++left;

    out.push_back(rect_from_extents(d, dot(at(left), d), dot(at(right), d), dot(at(i), nrm), dot(at(top), nrm)));
  }
  return out;
}

// Degenerate hulls (a point or a segment) have a single answer.
std::optional<BevRect> degenerate_rect(const std::vector<Vec2>& hull) {
  if (hull.size() == 1) return BevRect{hull[0], 0.0, 0.0, 0.0};
  if (hull.size() == 2) {
    const Vec2 e = hull[1] - hull[0];
    return BevRect{0.5 * (hull[0] + hull[1]), std::sqrt(dot(e, e)), 0.0, canonical_axis_angle(heading_of(e))};
  }
  return std::nullopt;
}

bool smaller_yaw(const BevRect& a, const BevRect& b) { return std::abs(a.yaw) < std::abs(b.yaw); }

// Mean squared distance from each point to the nearest rectangle side.
double boundary_misfit(const BevRect& rect, std::span<const Vec2> points) {
  const Vec2 d = heading_dir(rect.yaw);
  const Vec2 n = left_normal(d);
  double sum = 0.0;
  for (const auto& p : points) {
    const Vec2 rel = p - rect.center;
    const double a = 0.5 * rect.length - std::abs(dot(rel, d));
    const double b = 0.5 * rect.width - std::abs(dot(rel, n));
    const double m = std::min(std::abs(a), std::abs(b));
    sum += m * m;
  }
  return sum / static_cast<double>(points.size());
}

}  // namespace

BevRect min_area_rect(std::span<const Vec2> points) {
  const std::vector<Vec2> hull = convex_hull_2d(points);
  if (auto r = degenerate_rect(hull)) return *r;

  const std::vector<BevRect> cands = caliper_candidates(hull);
  BevRect best = cands.front();
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double area = cands[i].area();
    const double tol = 1e-12 * std::max(best.area(), 1e-300);
    if (area < best.area() - tol || (area <= best.area() + tol && smaller_yaw(cands[i], best))) best = cands[i];
  }
  return best;
}

BevRect fit_bev_rect(std::span<const Vec2> points, double area_slack) {
  const std::vector<Vec2> hull = convex_hull_2d(points);
  if (auto r = degenerate_rect(hull)) return *r;
  if (area_slack <= 0.0) return min_area_rect(points);

  const std::vector<BevRect> cands = caliper_candidates(hull);
  double min_area = cands.front().area();
  for (const auto& c : cands) min_area = std::min(min_area, c.area());

  const BevRect* best = nullptr;
  double best_misfit = 0.0;
  for (const auto& c : cands) {
    if (c.area() > (1.0 + area_slack) * min_area) continue;
    const double misfit = boundary_misfit(c, points);
    if (!best || misfit < best_misfit || (misfit == best_misfit && smaller_yaw(c, *best))) {
      best = &c;
      best_misfit = misfit;
    }
  }
  return *best;
}

double signed_distance_inside(const BevRect& rect, const Vec2& p) {
  const Vec2 d = heading_dir(rect.yaw);
  const Vec2 n = left_normal(d);
  const Vec2 rel = p - rect.center;
  return std::min(0.5 * rect.length - std::abs(dot(rel, d)), 0.5 * rect.width - std::abs(dot(rel, n)));
}

std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
  std::vector<Vec2> out(subject.begin(), subject.end());
  for (std::size_t i = 0, m = clip.size(); i < m && !out.empty(); ++i) {
    const Vec2& a = clip[i];
    const Vec2& b = clip[(i + 1) % m];
    std::vector<Vec2> in;
    in.swap(out);
    for (std::size_t j = 0, k = in.size(); j < k; ++j) {
      const Vec2& p = in[j];
      const Vec2& q = in[(j + 1) % k];
      const double sp = cross(a, b, p);
      const double sq = cross(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

double bev_intersection_area(const BevRect& a, const BevRect& b) {
  if (a.area() <= 0.0 || b.area() <= 0.0) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  const auto poly = clip_convex(ca, cb);
  if (poly.size() < 3) return 0.0;
  return std::max(0.0, polygon_area(poly));
}

double bev_iou(const BevRect& a, const BevRect& b) {
  const double inter = bev_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double top = std::max(a.loc.y() - a.h, b.loc.y() - b.h);
  const double bottom = std::min(a.loc.y(), b.loc.y());
  const double overlap_h = bottom - top;
  if (overlap_h <= 0.0) return 0.0;
  const double inter = bev_intersection_area(a.bev(), b.bev()) * overlap_h;
  if (inter <= 0.0) return 0.0;
  const double uni = a.l * a.w * a.h + b.l * b.w * b.h - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace lpcg
