#include "ldl/lsf.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ldl/numeric.hpp"
#include "ldl/partition.hpp"
#include "ldl/rng.hpp"
#include "ldl/text_io.hpp"

namespace ldl {

namespace {

constexpr double kZeroNorm = 1e-12;

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = X.row(idx[i]);
  return out;
}

Eigen::MatrixXd saps_for_set(const Eigen::MatrixXd& centers,
                             const BlockStructure& blocks) {
  const int k = static_cast<int>(centers.rows());
  std::vector<Eigen::Index> pairs_a, pairs_b;
  for (int b = 0; b < blocks.block_count; ++b) {
    std::vector<int> members;
    for (int c = 0; c < k; ++c)
      if (blocks.block_of[c] == b) members.push_back(c);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        pairs_a.push_back(members[i]);
        pairs_b.push_back(members[j]);
      }
  }
  Eigen::MatrixXd saps(pairs_a.size(), centers.cols());
  for (std::size_t t = 0; t < pairs_a.size(); ++t)
    saps.row(t) = 0.5 * (centers.row(pairs_a[t]) + centers.row(pairs_b[t]));
  return saps;
}

void append_distances(const Eigen::VectorXd& x, const Eigen::MatrixXd& pts,
                      double scale, Eigen::VectorXd& out, int& pos) {
  for (Eigen::Index r = 0; r < pts.rows(); ++r)
    out[pos++] = scale * (pts.row(r).transpose() - x).norm();
}

void append_cosines(const Eigen::VectorXd& x, double x_norm,
                    const Eigen::MatrixXd& pts, double scale,
                    Eigen::VectorXd& out, int& pos) {
  for (Eigen::Index r = 0; r < pts.rows(); ++r) {
    double s_norm = pts.row(r).norm();
    double cosine = (x_norm < kZeroNorm || s_norm < kZeroNorm)
                        ? 0.0
                        : pts.row(r).dot(x) / (x_norm * s_norm);
    out[pos++] = scale * cosine;
  }
}

void check_dim(const Eigen::VectorXd& x, Eigen::Index m, const char* where) {
  if (m >= 0 && x.size() != m)
    throw std::invalid_argument(std::string(where) + ": expected dimension " +
                                std::to_string(m) + ", got " +
                                std::to_string(x.size()));
}

void save_cluster(std::ostream& os, const ClusterResult& c) {
  io::write_matrix(os, c.centers);
  os << (c.degenerate ? 1 : 0) << '\n';
}

ClusterResult load_cluster(std::istream& is) {
  ClusterResult c;
  c.centers = io::read_matrix(is);
  int flag;
  is >> flag;
  c.degenerate = flag != 0;
  return c;
}

void save_blocks(std::ostream& os, const BlockStructure& b) {
  os << b.block_count << ' ' << b.block_of.size();
  for (int v : b.block_of) os << ' ' << v;
  os << '\n';
}

BlockStructure load_blocks(std::istream& is) {
  BlockStructure b;
  std::size_t n;
  is >> b.block_count >> n;
  b.block_of.resize(n);
  for (auto& v : b.block_of) is >> v;
  return b;
}

}  // namespace

void FusionWeights::validate() const {
  if (lambda < 0 || mu < 0 || epsilon < 0)
    throw std::invalid_argument("fusion weights must be non-negative");
  if (std::abs(lambda + mu + epsilon - 1.0) > 1e-9)
    throw std::invalid_argument("fusion weights must sum to 1");
}

void FeatureConfig::validate() const {
  if (sigma < 0.0 || sigma > 1.0)
    throw std::invalid_argument("sigma must lie in [0,1]");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("alpha must lie in [0,1]");
  if (pos_frac + neg_frac > 1.0 + 1e-12)
    throw std::invalid_argument("pos_frac + neg_frac exceeds 1");
  fusion.validate();
}

ClusterCounts cluster_counts(int p_size, int n_size, int u_size,
                             double sigma) {
  ClusterCounts counts;
  counts.m_j = std::max(1, robust_ceil(sigma * std::min(p_size, n_size)));
  counts.m_j_star = u_size == 0 ? 0 : robust_ceil(sigma * u_size);
  return counts;
}

SapSet build_saps(const ClusterResult& pos, const ClusterResult& neg,
                  const ClusterResult& unc, const BlockStructure& pos_blocks,
                  const BlockStructure& neg_blocks,
                  const BlockStructure& unc_blocks) {
  SapSet saps;
  saps.sap_p = saps_for_set(pos.centers, pos_blocks);
  saps.sap_n = saps_for_set(neg.centers, neg_blocks);
  saps.sap_u = saps_for_set(unc.centers, unc_blocks);
  return saps;
}

Eigen::VectorXd build_phi(const Eigen::VectorXd& x, const Eigen::MatrixXd& cp,
                          const Eigen::MatrixXd& cn, const Eigen::MatrixXd& cu,
                          double alpha) {
  if (cp.rows() > 0) check_dim(x, cp.cols(), "build_phi");
  if (cn.rows() > 0) check_dim(x, cn.cols(), "build_phi");
  if (cu.rows() > 0) check_dim(x, cu.cols(), "build_phi");
  Eigen::VectorXd phi(cp.rows() + cn.rows() + cu.rows());
  int pos = 0;
  append_distances(x, cp, 1.0, phi, pos);
  append_distances(x, cn, 1.0, phi, pos);
  append_distances(x, cu, alpha, phi, pos);
  return phi;
}

Eigen::VectorXd build_chi(const Eigen::VectorXd& x, const SapSet& saps,
                          double alpha) {
  if (saps.sap_p.rows() > 0) check_dim(x, saps.sap_p.cols(), "build_chi");
  if (saps.sap_n.rows() > 0) check_dim(x, saps.sap_n.cols(), "build_chi");
  if (saps.sap_u.rows() > 0) check_dim(x, saps.sap_u.cols(), "build_chi");
  Eigen::VectorXd chi(saps.total());
  int pos = 0;
  append_distances(x, saps.sap_p, 1.0, chi, pos);
  append_distances(x, saps.sap_n, 1.0, chi, pos);
  append_distances(x, saps.sap_u, alpha, chi, pos);
  return chi;
}

Eigen::VectorXd build_psi(const Eigen::VectorXd& x, const SapSet& saps,
                          double alpha) {
  if (saps.sap_p.rows() > 0) check_dim(x, saps.sap_p.cols(), "build_psi");
  if (saps.sap_n.rows() > 0) check_dim(x, saps.sap_n.cols(), "build_psi");
  if (saps.sap_u.rows() > 0) check_dim(x, saps.sap_u.cols(), "build_psi");
  Eigen::VectorXd psi(saps.total());
  const double x_norm = x.norm();
  int pos = 0;
  append_cosines(x, x_norm, saps.sap_p, 1.0, psi, pos);
  append_cosines(x, x_norm, saps.sap_n, 1.0, psi, pos);
  append_cosines(x, x_norm, saps.sap_u, alpha, psi, pos);
  return psi;
}

Eigen::VectorXd fuse(const Eigen::VectorXd& phi, const Eigen::VectorXd& chi,
                     const Eigen::VectorXd& psi, const FusionWeights& w) {
  Eigen::VectorXd out(phi.size() + chi.size() + psi.size());
  out.head(phi.size()) = w.lambda * phi;
  out.segment(phi.size(), chi.size()) = w.mu * chi;
  out.tail(psi.size()) = w.epsilon * psi;
  return out;
}

void Standardizer::fit(const Eigen::MatrixXd& X) {
  mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
  Eigen::VectorXd var = centered.array().square().colwise().mean();
  scale = var.array().sqrt();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (scale[j] < kZeroNorm) scale[j] = 1.0;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
  return (X.rowwise() - mean.transpose()).array().rowwise() /
         scale.transpose().array();
}

Eigen::VectorXd Standardizer::transform_row(const Eigen::VectorXd& x) const {
  return (x - mean).cwiseQuotient(scale);
}

int LsfMapper::phi_dim() const {
  return static_cast<int>(pos_.centers.rows() + neg_.centers.rows() +
                          unc_.centers.rows());
}

void LsfMapper::transform_parts(const Eigen::VectorXd& x, Eigen::VectorXd& phi,
                                Eigen::VectorXd& chi,
                                Eigen::VectorXd& psi) const {
  phi = build_phi(x, pos_.centers, neg_.centers, unc_.centers, config_.alpha);
  chi = build_chi(x, saps_, config_.alpha);
  psi = build_psi(x, saps_, config_.alpha);
}

Eigen::VectorXd LsfMapper::transform(const Eigen::VectorXd& x) const {
  Eigen::VectorXd phi, chi, psi;
  transform_parts(x, phi, chi, psi);
  return fuse(phi, chi, psi, config_.fusion);
}

LsfMapper fit_lsf_mapper(const LabelDistributionDataset& train, int label,
                         const FeatureConfig& config, std::uint64_t seed) {
  config.validate();
  if (train.instance_count() == 0)
    throw std::invalid_argument("fit_lsf_mapper: empty training set");
  if (label < 0 || label >= train.label_count())
    throw std::invalid_argument("fit_lsf_mapper: label index out of range");

  const Eigen::MatrixXd& X = train.features;
  LabelPartition part = partition_by_percentile(
      train.distributions.col(label), config.pos_frac, config.neg_frac, label);

  ClusterCounts counts = cluster_counts(
      static_cast<int>(part.positive.size()),
      static_cast<int>(part.negative.size()),
      static_cast<int>(part.uncertain.size()), config.sigma);

  LsfMapper mapper;
  mapper.label_index_ = label;
  mapper.config_ = config;
  mapper.pos_ = spectral_cluster(rows_of(X, part.positive), counts.m_j,
                                 rng::derive(seed, rng::kClusterPositive));
  mapper.neg_ = spectral_cluster(rows_of(X, part.negative), counts.m_j,
                                 rng::derive(seed, rng::kClusterNegative));
  if (counts.m_j_star > 0) {
    mapper.unc_ = spectral_cluster(rows_of(X, part.uncertain), counts.m_j_star,
                                   rng::derive(seed, rng::kClusterUncertain));
  } else {
    mapper.unc_.centers.resize(0, X.cols());
  }

  mapper.pos_blocks_ =
      form_blocks(mapper.pos_.centers, config.target_block_size,
                  rng::derive(seed, rng::kBlocksPositive));
  mapper.neg_blocks_ =
      form_blocks(mapper.neg_.centers, config.target_block_size,
                  rng::derive(seed, rng::kBlocksNegative));
  if (counts.m_j_star > 0) {
    mapper.unc_blocks_ =
        form_blocks(mapper.unc_.centers, config.target_block_size,
                    rng::derive(seed, rng::kBlocksUncertain));
  }

  mapper.saps_ = build_saps(mapper.pos_, mapper.neg_, mapper.unc_,
                            mapper.pos_blocks_, mapper.neg_blocks_,
                            mapper.unc_blocks_);
  mapper.output_dim_ = mapper.phi_dim() + 2 * mapper.saps_.total();
  return mapper;
}

void LsfMapper::save(std::ostream& os) const {
  os << "ldl-mapper 1\n";
  os << label_index_ << ' ' << output_dim_ << '\n';
  os << io::fmt(config_.sigma) << ' ' << io::fmt(config_.alpha) << ' '
     << io::fmt(config_.pos_frac) << ' ' << io::fmt(config_.neg_frac) << ' '
     << config_.target_block_size << ' ' << io::fmt(config_.fusion.lambda)
     << ' ' << io::fmt(config_.fusion.mu) << ' '
     << io::fmt(config_.fusion.epsilon) << '\n';
  save_cluster(os, pos_);
  save_cluster(os, neg_);
  save_cluster(os, unc_);
  save_blocks(os, pos_blocks_);
  save_blocks(os, neg_blocks_);
  save_blocks(os, unc_blocks_);
  io::write_matrix(os, saps_.sap_p);
  io::write_matrix(os, saps_.sap_n);
  io::write_matrix(os, saps_.sap_u);
}

LsfMapper LsfMapper::load(std::istream& is) {
  io::expect_token(is, "ldl-mapper");
  int version;
  is >> version;
  if (version != 1) throw std::runtime_error("unsupported mapper version");
  LsfMapper m;
  is >> m.label_index_ >> m.output_dim_;
  is >> m.config_.sigma >> m.config_.alpha >> m.config_.pos_frac >>
      m.config_.neg_frac >> m.config_.target_block_size >>
      m.config_.fusion.lambda >> m.config_.fusion.mu >>
      m.config_.fusion.epsilon;
  m.pos_ = load_cluster(is);
  m.neg_ = load_cluster(is);
  m.unc_ = load_cluster(is);
  m.pos_blocks_ = load_blocks(is);
  m.neg_blocks_ = load_blocks(is);
  m.unc_blocks_ = load_blocks(is);
  m.saps_.sap_p = io::read_matrix(is);
  m.saps_.sap_n = io::read_matrix(is);
  m.saps_.sap_u = io::read_matrix(is);
  if (!is) throw std::runtime_error("truncated mapper");
  return m;
}

}  // namespace ldl
