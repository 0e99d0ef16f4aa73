#include "lpcg/cluster.hpp"

#include "lpcg/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace lpcg {
namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

class NeighbourGrid {
 public:
  // Cells are a hair wider than eps so rounding in p / cell can never push a
  // true neighbour two cells away.
  NeighbourGrid(std::span<const Eigen::Vector3d> points, double eps)
      : points_(points), eps_(eps), cell_(eps * (1.0 + 1e-9)) {
    cells_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(points[i])].push_back(i);
  }

  // Sorted ascending.
  void query(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const CellKey c = key(points_[i]);
    const double eps2 = eps_ * eps_;
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second)
            if ((points_[j] - points_[i]).squaredNorm() <= eps2) out.push_back(j);
        }
    std::sort(out.begin(), out.end());
  }

 private:
  CellKey key(const Eigen::Vector3d& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }

  std::span<const Eigen::Vector3d> points_;
  double eps_;
  double cell_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

constexpr int kUnvisited = -2;

}  // namespace

void ClusterParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::kInvalidConfig, fmt::format("eps must be > 0, got {}", eps));
  if (min_pts < 1) throw Error(ErrorCode::kInvalidConfig, "min_pts must be >= 1");
}

std::size_t Clustering::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

Clustering dbscan(std::span<const Eigen::Vector3d> points, const ClusterParams& params) {
  params.validate();
  Clustering result;
  result.labels.assign(points.size(), kUnvisited);
  if (points.empty()) return result;

  const NeighbourGrid grid(points, params.eps);
  std::vector<std::size_t> neighbours;
  std::vector<std::size_t> frontier;

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (result.labels[i] != kUnvisited) continue;
    grid.query(i, neighbours);
    if (neighbours.size() < params.min_pts) {
      result.labels[i] = Clustering::kNoise;
      continue;
    }
    const int id = static_cast<int>(result.cluster_sizes.size());
    result.cluster_sizes.push_back(0);
    result.labels[i] = id;
    frontier.assign(neighbours.begin(), neighbours.end());
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const std::size_t q = frontier[f];
      if (result.labels[q] == Clustering::kNoise) result.labels[q] = id;
      if (result.labels[q] != kUnvisited) continue;
      result.labels[q] = id;
      grid.query(q, neighbours);
      if (neighbours.size() >= params.min_pts) frontier.insert(frontier.end(), neighbours.begin(), neighbours.end());
    }
  }

  for (int label : result.labels)
    if (label >= 0) ++result.cluster_sizes[static_cast<std::size_t>(label)];
  return result;
}

int largest_cluster_id(const Clustering& c) {
  int best = -1;
  for (std::size_t id = 0; id < c.cluster_sizes.size(); ++id)
    if (best < 0 || c.cluster_sizes[id] > c.cluster_sizes[static_cast<std::size_t>(best)]) best = static_cast<int>(id);
  return best;
}

std::vector<std::size_t> largest_cluster_indices(const Clustering& c) {
  std::vector<std::size_t> out;
  const int id = largest_cluster_id(c);
  if (id < 0) return out;
  for (std::size_t i = 0; i < c.labels.size(); ++i)
    if (c.labels[i] == id) out.push_back(i);
  return out;
}

std::vector<Eigen::Vector3d> largest_cluster(const Clustering& c, std::span<const Eigen::Vector3d> points) {
  std::vector<Eigen::Vector3d> out;
  for (std::size_t i : largest_cluster_indices(c)) out.push_back(points[i]);
  return out;
}

}  // namespace lpcg
