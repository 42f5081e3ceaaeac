#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <ostream>

#include "ldl/clustering.hpp"
#include "ldl/dataset.hpp"

namespace ldl {

// Weights for the serial fusion of the three feature blocks. Must sum to 1.
struct FusionWeights {
  double lambda = 1.0 / 3.0;
  double mu = 1.0 / 3.0;
  double epsilon = 1.0 / 3.0;

  void validate() const;
};

struct FeatureConfig {
  double sigma = 0.1;         // cluster-count ratio
  double alpha = 0.5;         // uncertain-set discount
  double pos_frac = 0.55;     // percentile assigned to the positive set
  double neg_frac = 0.35;     // percentile assigned to the negative set
  int target_block_size = 4;  // centers per block; 0 = no block restriction
  FusionWeights fusion;

  void validate() const;
};

struct ClusterCounts {
  int m_j = 0;       // clusters for each of the positive and negative sets
  int m_j_star = 0;  // clusters for the uncertain set
};

// m_j = max(1, ceil(sigma*min(p_size, n_size))), m_j* = ceil(sigma*u_size).
ClusterCounts cluster_counts(int p_size, int n_size, int u_size, double sigma);

// Midpoints of center pairs, restricted to pairs within the same block.
// Row order: blocks ascending, then pairs (k1,k2) lexicographic.
struct SapSet {
  Eigen::MatrixXd sap_p;
  Eigen::MatrixXd sap_n;
  Eigen::MatrixXd sap_u;

  int total() const {
    return static_cast<int>(sap_p.rows() + sap_n.rows() + sap_u.rows());
  }
};

SapSet build_saps(const ClusterResult& pos, const ClusterResult& neg,
                  const ClusterResult& unc, const BlockStructure& pos_blocks,
                  const BlockStructure& neg_blocks,
                  const BlockStructure& unc_blocks);

// Distances to prototypes: [d(x,cp_.), d(x,cn_.), alpha*d(x,cu_.)].
Eigen::VectorXd build_phi(const Eigen::VectorXd& x, const Eigen::MatrixXd& cp,
                          const Eigen::MatrixXd& cn, const Eigen::MatrixXd& cu,
                          double alpha);

// Distances to SAPs, same layout and discount as build_phi.
Eigen::VectorXd build_chi(const Eigen::VectorXd& x, const SapSet& saps,
                          double alpha);

// Cosine of the angle between x and each SAP vector; 0 whenever either
// vector's norm falls below 1e-12. Uncertain entries are scaled by alpha.
Eigen::VectorXd build_psi(const Eigen::VectorXd& x, const SapSet& saps,
                          double alpha);

// [lambda*phi, mu*chi, epsilon*psi].
Eigen::VectorXd fuse(const Eigen::VectorXd& phi, const Eigen::VectorXd& chi,
                     const Eigen::VectorXd& psi, const FusionWeights& w);

// Per-column z-score statistics fitted on a training split and reused at
// inference. Columns with (near-)zero variance keep scale 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  void fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd transform_row(const Eigen::VectorXd& x) const;
};

// Fitted per-label transformer: prototypes from spectral clustering of the
// positive/negative/uncertain sets, block structure, SAPs, and fusion
// weights. A pure transform after fitting.
class LsfMapper {
 public:
  LsfMapper() = default;

  int label_index() const { return label_index_; }
  int output_dim() const { return output_dim_; }
  int phi_dim() const;
  const FeatureConfig& config() const { return config_; }
  const ClusterResult& positive_prototypes() const { return pos_; }
  const ClusterResult& negative_prototypes() const { return neg_; }
  const ClusterResult& uncertain_prototypes() const { return unc_; }
  const SapSet& saps() const { return saps_; }
  const BlockStructure& positive_blocks() const { return pos_blocks_; }
  const BlockStructure& negative_blocks() const { return neg_blocks_; }
  const BlockStructure& uncertain_blocks() const { return unc_blocks_; }

  // Fused feature vector [lambda*phi, mu*chi, epsilon*psi] for one instance
  // (in the same feature space the mapper was fitted in).
  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;

  // Raw (unweighted) parts; alpha discounts are already applied.
  void transform_parts(const Eigen::VectorXd& x, Eigen::VectorXd& phi,
                       Eigen::VectorXd& chi, Eigen::VectorXd& psi) const;

  // Re-weighting only touches the fusion scaling, never the fitted geometry.
  void set_fusion(const FusionWeights& w) { config_.fusion = w; }

  void save(std::ostream& os) const;
  static LsfMapper load(std::istream& is);

  friend LsfMapper fit_lsf_mapper(const LabelDistributionDataset& train,
                                  int label, const FeatureConfig& config,
                                  std::uint64_t seed);

 private:
  int label_index_ = -1;
  int output_dim_ = 0;
  FeatureConfig config_;
  ClusterResult pos_, neg_, unc_;
  BlockStructure pos_blocks_, neg_blocks_, unc_blocks_;
  SapSet saps_;
};

// Algorithm: partition the training instances for this label, cluster each
// set spectrally, form blocks, derive SAPs, and freeze the mapping.
LsfMapper fit_lsf_mapper(const LabelDistributionDataset& train, int label,
                         const FeatureConfig& config, std::uint64_t seed);

}  // namespace ldl
