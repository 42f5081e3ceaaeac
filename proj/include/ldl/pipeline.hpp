#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <ostream>
#include <vector>

#include "ldl/dataset.hpp"
#include "ldl/lsf.hpp"
#include "ldl/maxent.hpp"

namespace ldl {

struct TrainConfig {
  FeatureConfig features;
  OptimizerConfig optimizer;
  double tr_fraction = 0.5;  // share of the training split that forms Tr
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct LabelDimensions {
  int m_j = 0;
  int m_j_star = 0;
  int sap_count = 0;
  int output_dim = 0;
};

// Machine-readable training record. geometry_hash fingerprints the fitted
// partitions/prototypes/blocks/SAPs (fusion weights excluded), so ablation
// variants sharing a seed share the hash. Timings are wall-clock and are
// the only non-reproducible fields.
struct TrainManifest {
  std::uint64_t seed = 0;
  int n_train = 0;
  int n_tr = 0;
  int n_val = 0;
  std::vector<LabelDimensions> label_dims;
  std::uint64_t geometry_hash = 0;
  double fit_seconds = 0.0;
  double model_seconds = 0.0;
};

// The full LDL-LIFT-SAP stack: shared standardization, one LSF mapper and
// one base model per label, and a softmax meta model over the p base
// predictions. Immutable after training; safe for concurrent prediction.
class TrainedPipeline {
 public:
  Eigen::VectorXd predict(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& X) const;

  int label_count() const { return static_cast<int>(mappers_.size()); }
  const std::vector<LsfMapper>& mappers() const { return mappers_; }
  const std::vector<BaseModel>& base_models() const { return base_models_; }
  const MetaModel& meta() const { return meta_; }
  const Standardizer& standardizer() const { return standardizer_; }

  void save(std::ostream& os) const;
  void save_file(const std::string& path) const;
  static TrainedPipeline load(std::istream& is);
  static TrainedPipeline load_file(const std::string& path);

  friend TrainedPipeline train(const LabelDistributionDataset& training,
                               const TrainConfig& config,
                               TrainManifest* manifest);

 private:
  Standardizer standardizer_;
  std::vector<LsfMapper> mappers_;
  std::vector<BaseModel> base_models_;
  MetaModel meta_;
  double tr_fraction_ = 0.5;
  std::uint64_t seed_ = 0;
};

// Trains the two-stage stack: one Tr/Val split shared by every label,
// mappers fitted on the full training split, base models on Tr, the meta
// model on the per-label Val predictions against Val's true distributions.
TrainedPipeline train(const LabelDistributionDataset& training,
                      const TrainConfig& config,
                      TrainManifest* manifest = nullptr);

// The (lambda, mu, epsilon) simplex lattice with the given step, ordered
// lexicographically. step must divide 1 evenly.
std::vector<FusionWeights> fusion_grid(double step);

struct GridPoint {
  FusionWeights weights;
  double val_kl = 0.0;
};

struct GridSearchReport {
  std::vector<GridPoint> points;  // lexicographic order
  FusionWeights best;
};

// Evaluates every lattice triple with shared clustering (weights only
// rescale the fitted feature blocks) and returns the weights minimizing
// mean K-L on the Val group; ties go to the lexicographically smallest
// triple. `restrict_*` pin a component to zero for the ablation variants.
FusionWeights grid_search_fusion(const LabelDistributionDataset& training,
                                 const TrainConfig& config, double step = 0.05,
                                 GridSearchReport* report = nullptr,
                                 bool restrict_mu_zero = false,
                                 bool restrict_epsilon_zero = false);

}  // namespace ldl
