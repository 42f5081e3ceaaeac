#include "ldl/clustering.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ldl/rng.hpp"

namespace ldl {

namespace {

double sq_dist(const Eigen::MatrixXd& a, int i, const Eigen::MatrixXd& b,
               int j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// Weighted index draw by prefix-sum scan; falls back to the first strictly
// positive weight if rounding pushes the cursor past the end.
int sample_weighted(const std::vector<double>& weights, double total,
                    rng::Engine& eng) {
  double u = eng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u <= 0.0 && weights[i] > 0.0) return static_cast<int>(i);
  }
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 0.0) return static_cast<int>(i);
  return 0;
}

Eigen::MatrixXd seed_kmeanspp(const Eigen::MatrixXd& points, int k,
                              rng::Engine& eng) {
  const int n = static_cast<int>(points.rows());
  Eigen::MatrixXd centers(k, points.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> mindist(n, std::numeric_limits<double>::infinity());

  int first = static_cast<int>(eng.bounded(n));
  centers.row(0) = points.row(first);
  chosen[first] = true;
  for (int i = 0; i < n; ++i)
    mindist[i] = sq_dist(points, i, centers, 0);

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += mindist[i];
    int pick;
    if (total <= 0.0) {
      // Remaining points duplicate existing centers; take the lowest
      // unchosen index so the seeding stays deterministic.
      pick = 0;
      while (pick < n && chosen[pick]) ++pick;
      if (pick == n) pick = 0;
    } else {
      pick = sample_weighted(mindist, total, eng);
    }
    centers.row(c) = points.row(pick);
    chosen[pick] = true;
    for (int i = 0; i < n; ++i)
      mindist[i] = std::min(mindist[i], sq_dist(points, i, centers, c));
  }
  return centers;
}

void assign_nearest(const Eigen::MatrixXd& points,
                    const Eigen::MatrixXd& centers,
                    std::vector<int>& assignment) {
  const int n = static_cast<int>(points.rows());
  const int k = static_cast<int>(centers.rows());
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d = sq_dist(points, i, centers, 0);
    for (int c = 1; c < k; ++c) {
      double d = sq_dist(points, i, centers, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[i] = best;
  }
}

Eigen::MatrixXd means_of(const Eigen::MatrixXd& points,
                         const std::vector<int>& assignment, int k) {
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(k, points.cols());
  std::vector<int> counts(k, 0);
  for (int i = 0; i < static_cast<int>(points.rows()); ++i) {
    centers.row(assignment[i]) += points.row(i);
    ++counts[assignment[i]];
  }
  for (int c = 0; c < k; ++c)
    if (counts[c] > 0) centers.row(c) /= counts[c];
  return centers;
}

// Moves the farthest point of the largest cluster into each empty cluster.
void repair_empty(const Eigen::MatrixXd& points, std::vector<int>& assignment,
                  Eigen::MatrixXd& centers) {
  const int n = static_cast<int>(points.rows());
  const int k = static_cast<int>(centers.rows());
  for (;;) {
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) ++counts[assignment[i]];
    int empty = -1;
    for (int c = 0; c < k; ++c)
      if (counts[c] == 0) {
        empty = c;
        break;
      }
    if (empty < 0) return;

    int largest = 0;
    for (int c = 1; c < k; ++c)
      if (counts[c] > counts[largest]) largest = c;

    int victim = -1;
    double worst = -1.0;
    for (int i = 0; i < n; ++i) {
      if (assignment[i] != largest) continue;
      double d = sq_dist(points, i, centers, largest);
      if (d > worst) {
        worst = d;
        victim = i;
      }
    }
    assignment[victim] = empty;
    centers = means_of(points, assignment, k);
  }
}

}  // namespace

double within_cluster_ss(const Eigen::MatrixXd& points,
                         const ClusterResult& result) {
  double ss = 0.0;
  for (int i = 0; i < static_cast<int>(points.rows()); ++i)
    ss += sq_dist(points, i, result.centers, result.assignment[i]);
  return ss;
}

ClusterResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                     int max_iter, std::vector<double>* wcss_trace) {
  const int n = static_cast<int>(points.rows());
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (k > n) throw std::invalid_argument("kmeans: k exceeds point count");

  rng::Engine eng(seed);
  ClusterResult res;
  res.centers = seed_kmeanspp(points, k, eng);
  res.assignment.assign(n, 0);
  assign_nearest(points, res.centers, res.assignment);
  res.centers = means_of(points, res.assignment, k);
  repair_empty(points, res.assignment, res.centers);
  if (wcss_trace) wcss_trace->push_back(within_cluster_ss(points, res));

  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> next(n);
    assign_nearest(points, res.centers, next);
    if (next == res.assignment) break;
    res.assignment = next;
    res.centers = means_of(points, res.assignment, k);
    repair_empty(points, res.assignment, res.centers);
    if (wcss_trace) wcss_trace->push_back(within_cluster_ss(points, res));
  }
  return res;
}

ClusterResult spectral_cluster(const Eigen::MatrixXd& points, int k,
                               std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  if (k < 1) throw std::invalid_argument("spectral_cluster: k must be >= 1");
  if (k > n)
    throw std::invalid_argument("spectral_cluster: k exceeds point count");

  ClusterResult res;
  if (k == 1) {
    res.centers = points.colwise().mean();
    res.assignment.assign(n, 0);
    return res;
  }
  if (k == n) {
    res.centers = points;
    res.assignment.resize(n);
    for (int i = 0; i < n; ++i) res.assignment[i] = i;
    return res;
  }

  // Pairwise distances and the median bandwidth.
  Eigen::MatrixXd d2(n, n);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      double d = sq_dist(points, i, points, j);
      d2(i, j) = d2(j, i) = d;
      dists.push_back(std::sqrt(d));
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t cnt = dists.size();
  double gamma = cnt % 2 == 1
                     ? dists[cnt / 2]
                     : 0.5 * (dists[cnt / 2 - 1] + dists[cnt / 2]);

  if (gamma < 1e-12) {
    // All points coincide: no geometry to cut, assign round-robin.
    res.degenerate = true;
    res.assignment.resize(n);
    for (int i = 0; i < n; ++i) res.assignment[i] = i % k;
    res.centers = means_of(points, res.assignment, k);
    return res;
  }

  Eigen::MatrixXd affinity =
      (-d2.array() / (2.0 * gamma * gamma)).exp().matrix();
  Eigen::VectorXd dsqrt_inv =
      affinity.rowwise().sum().array().sqrt().inverse().matrix();
  Eigen::MatrixXd laplacian =
      Eigen::MatrixXd::Identity(n, n) -
      dsqrt_inv.asDiagonal() * affinity * dsqrt_inv.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_cluster: eigendecomposition failed");
  Eigen::MatrixXd embed = es.eigenvectors().leftCols(k);
  for (int i = 0; i < n; ++i) {
    double norm = embed.row(i).norm();
    if (norm > 1e-12) embed.row(i) /= norm;
  }

  ClusterResult km = kmeans(embed, k, rng::derive(seed, rng::kSpectralEmbed));
  res.assignment = km.assignment;
  res.centers = means_of(points, res.assignment, k);
  return res;
}

BlockStructure form_blocks(const Eigen::MatrixXd& centers, int target_size,
                           std::uint64_t seed) {
  const int k = static_cast<int>(centers.rows());
  if (k < 1) throw std::invalid_argument("form_blocks: need at least 1 center");
  BlockStructure blocks;
  if (target_size <= 0 || k <= target_size) {
    blocks.block_of.assign(k, 0);
    blocks.block_count = 1;
    return blocks;
  }
  const int count = (k + target_size - 1) / target_size;
  ClusterResult km = kmeans(centers, count, seed);
  blocks.block_of = km.assignment;
  blocks.block_count = count;
  return blocks;
}

}  // namespace ldl
