#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace lpcg {

struct ClusterParams {
  double eps = 0.6;     // metres, neighbourhood radius (inclusive)
  std::size_t min_pts = 5;  // neighbourhood size, counting the point itself

  void validate() const;
};

struct Clustering {
  static constexpr int kNoise = -1;

  std::vector<int> labels;                 // per point: cluster id or kNoise
  std::vector<std::size_t> cluster_sizes;  // indexed by cluster id

  std::size_t num_clusters() const { return cluster_sizes.size(); }
  std::size_t noise_count() const;
};

// DBSCAN with an exact uniform-grid neighbour search. Points are visited in
// input order and neighbours are expanded in ascending index order, so the
// labelling is deterministic; a border point joins the first cluster that
// reaches it.
Clustering dbscan(std::span<const Eigen::Vector3d> points, const ClusterParams& params);

// Id of the cluster with most points (lowest id on ties), or -1 if none.
int largest_cluster_id(const Clustering& c);
std::vector<std::size_t> largest_cluster_indices(const Clustering& c);
std::vector<Eigen::Vector3d> largest_cluster(const Clustering& c, std::span<const Eigen::Vector3d> points);

}  // namespace lpcg
