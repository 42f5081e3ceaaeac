#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ldl {

struct ClusterResult {
  Eigen::MatrixXd centers;      // k x m, in the original feature space
  std::vector<int> assignment;  // cluster index per input point
  bool degenerate = false;      // set when the affinity fallback fired

  int cluster_count() const { return static_cast<int>(centers.rows()); }
};

// Lloyd's algorithm from k-means++ seeding, run until the assignment stops
// changing or max_iter. Empty clusters are repaired by stealing the point
// farthest from the center of the largest cluster. Ties (nearest center,
// largest cluster, farthest point) always resolve to the lowest index.
ClusterResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                     int max_iter = 100,
                     std::vector<double>* wcss_trace = nullptr);

// Normalized spectral clustering: Gaussian affinity with bandwidth = median
// pairwise distance, symmetric normalized Laplacian, k smallest eigenvectors
// with unit-normalized rows, k-means on the embedding. Returned centers are
// per-cluster means of the original points. If all points coincide the
// affinity is degenerate and points are assigned round-robin with the
// `degenerate` flag set.
ClusterResult spectral_cluster(const Eigen::MatrixXd& points, int k,
                               std::uint64_t seed);

struct BlockStructure {
  std::vector<int> block_of;  // block index per cluster center
  int block_count = 0;
};

// Secondary k-means over cluster centers. block_count = ceil(k/target_size);
// everything lands in one block when k <= target_size or target_size <= 0
// (0 disables the block restriction).
BlockStructure form_blocks(const Eigen::MatrixXd& centers, int target_size,
                           std::uint64_t seed);

double within_cluster_ss(const Eigen::MatrixXd& points,
                         const ClusterResult& result);

}  // namespace ldl
