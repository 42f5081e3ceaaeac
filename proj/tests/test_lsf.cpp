#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ldl/lsf.hpp"
#include "ldl/rng.hpp"
#include "oracles.hpp"

using ldl::build_chi;
using ldl::build_phi;
using ldl::build_psi;
using ldl::build_saps;
using ldl::cluster_counts;
using ldl::FeatureConfig;
using ldl::fit_lsf_mapper;
using ldl::fuse;
using ldl::FusionWeights;
using ldl::LabelDistributionDataset;
using ldl::LsfMapper;
using ldl::SapSet;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Random dataset whose label distributions are softmax responses to a few
// Gaussian clusters, so every label yields non-trivial partitions.
LabelDistributionDataset synthetic_dataset(int n, int m, int p,
                                           ldl::rng::Engine& eng) {
  LabelDistributionDataset ds;
  ds.name = "synthetic";
  ds.features.resize(n, m);
  ds.distributions.resize(n, p);
  Eigen::MatrixXd anchors(p, m);
  for (int j = 0; j < p; ++j)
    for (int d = 0; d < m; ++d) anchors(j, d) = eng.uniform(-3, 3);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < m; ++d) ds.features(i, d) = eng.uniform(-3, 3);
    Eigen::VectorXd logit(p);
    for (int j = 0; j < p; ++j)
      logit[j] = -0.5 * (ds.features.row(i) - anchors.row(j)).squaredNorm();
    logit.array() -= logit.maxCoeff();
    Eigen::VectorXd q = logit.array().exp();
    ds.distributions.row(i) = q / q.sum();
  }
  return ds;
}

int brute_force_sap_count(const ldl::ClusterResult& protos,
                          const ldl::BlockStructure& blocks) {
  int count = 0;
  const int k = protos.cluster_count();
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (blocks.block_of[a] == blocks.block_of[b]) ++count;
  return count;
}

}  // namespace

TEST_CASE("cluster counts follow the ceiling rule") {
  auto c = cluster_counts(100, 50, 0, 0.1);
  CHECK(c.m_j == 5);
  CHECK(c.m_j_star == 0);

  CHECK(cluster_counts(100, 50, 2, 0.1).m_j_star == 1);
  CHECK(cluster_counts(11, 7, 0, 0.1).m_j == 1);  // ceil(0.7) = 1
  CHECK(cluster_counts(40, 60, 25, 0.1).m_j == 4);
  CHECK(cluster_counts(40, 60, 25, 0.1).m_j_star == 3);
  CHECK(cluster_counts(5, 5, 5, 0.0).m_j == 1);  // clamped
  CHECK(cluster_counts(5, 5, 5, 0.0).m_j_star == 0);
}

TEST_CASE("build_phi lays out prototype distances with the discount") {
  Eigen::MatrixXd cp(1, 2), cn(1, 2), cu(1, 2);
  cp << 3, 4;
  cn << 0, 1;
  cu << 6, 8;
  Eigen::VectorXd phi = build_phi(vec2(0, 0), cp, cn, cu, 0.5);
  REQUIRE(phi.size() == 3);
  CHECK(phi[0] == doctest::Approx(5.0));
  CHECK(phi[1] == doctest::Approx(1.0));
  CHECK(phi[2] == doctest::Approx(5.0));  // 0.5 * 10

  // x equal to a prototype zeroes that entry
  CHECK(build_phi(vec2(3, 4), cp, cn, cu, 0.5)[0] == doctest::Approx(0.0));

  // alpha = 0 silences the uncertain block
  CHECK(build_phi(vec2(0, 0), cp, cn, cu, 0.0)[2] == doctest::Approx(0.0));

  CHECK_THROWS(build_phi(Eigen::VectorXd::Zero(3), cp, cn, cu, 0.5));
}

TEST_CASE("build_saps enumerates midpoints of within-block pairs") {
  ldl::ClusterResult pos, neg, unc;
  pos.centers.resize(3, 2);
  pos.centers << 0, 0, 2, 0, 0, 2;
  neg.centers.resize(1, 2);
  neg.centers << 5, 5;
  unc.centers.resize(0, 2);
  ldl::BlockStructure one{{0, 0, 0}, 1}, single{{0}, 1}, none{{}, 0};

  SapSet saps = build_saps(pos, neg, unc, one, single, none);
  REQUIRE(saps.sap_p.rows() == 3);
  CHECK(saps.sap_p.row(0) == Eigen::RowVector2d(1, 0));  // pair (0,1)
  CHECK(saps.sap_p.row(1) == Eigen::RowVector2d(0, 1));  // pair (0,2)
  CHECK(saps.sap_p.row(2) == Eigen::RowVector2d(1, 1));  // pair (1,2)
  CHECK(saps.sap_n.rows() == 0);  // single center, no pairs
  CHECK(saps.sap_u.rows() == 0);

  // four centers in one block -> C(4,2) = 6 SAPs
  ldl::ClusterResult four;
  four.centers = Eigen::MatrixXd::Random(4, 2);
  ldl::BlockStructure all4{{0, 0, 0, 0}, 1};
  CHECK(build_saps(four, neg, unc, all4, single, none).sap_p.rows() == 6);
}

TEST_CASE("block restriction drops cross-block pairs") {
  ldl::ClusterResult protos;
  protos.centers.resize(4, 1);
  protos.centers << 0, 1, 10, 11;
  ldl::BlockStructure two{{0, 0, 1, 1}, 2};
  ldl::ClusterResult empty;
  empty.centers.resize(0, 1);
  ldl::BlockStructure none{{}, 0};

  SapSet saps = build_saps(protos, empty, empty, two, none, none);
  REQUIRE(saps.sap_p.rows() == 2);  // (0,1) and (2,3) only
  CHECK(saps.sap_p(0, 0) == doctest::Approx(0.5));
  CHECK(saps.sap_p(1, 0) == doctest::Approx(10.5));
}

TEST_CASE("build_chi measures SAP distances") {
  SapSet saps;
  saps.sap_p.resize(1, 2);
  saps.sap_p << 4, 5;
  saps.sap_n.resize(0, 2);
  saps.sap_u.resize(0, 2);
  Eigen::VectorXd chi = build_chi(vec2(1, 1), saps, 0.5);
  REQUIRE(chi.size() == 1);
  CHECK(chi[0] == doctest::Approx(5.0));

  CHECK(build_chi(vec2(4, 5), saps, 0.5)[0] == doctest::Approx(0.0));

  SapSet empty;
  empty.sap_p.resize(0, 2);
  empty.sap_n.resize(0, 2);
  empty.sap_u.resize(0, 2);
  CHECK(build_chi(vec2(1, 1), empty, 0.5).size() == 0);
}

TEST_CASE("build_psi cosine cases") {
  SapSet saps;
  saps.sap_p.resize(3, 2);
  saps.sap_p << 2, 2, -1, 1, 1, 1;
  saps.sap_n.resize(0, 2);
  saps.sap_u.resize(0, 2);
  Eigen::VectorXd psi = build_psi(vec2(1, 1), saps, 0.5);
  CHECK(psi[0] == doctest::Approx(1.0));   // parallel
  CHECK(psi[1] == doctest::Approx(0.0));   // orthogonal
  CHECK(psi[2] == doctest::Approx(1.0));

  CHECK(build_psi(vec2(1, 0), saps, 0.5)[2] ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-5));

  // zero-norm guard
  CHECK(build_psi(vec2(0, 0), saps, 0.5)[0] == doctest::Approx(0.0));
  SapSet zero;
  zero.sap_p.resize(1, 2);
  zero.sap_p << 0, 0;
  zero.sap_n.resize(0, 2);
  zero.sap_u.resize(0, 2);
  CHECK(build_psi(vec2(1, 1), zero, 0.5)[0] == doctest::Approx(0.0));

  // alpha scales only the uncertain block
  SapSet unc;
  unc.sap_p.resize(0, 2);
  unc.sap_n.resize(0, 2);
  unc.sap_u.resize(1, 2);
  unc.sap_u << 2, 2;
  CHECK(build_psi(vec2(1, 1), unc, 0.5)[0] == doctest::Approx(0.5));
}

TEST_CASE("fuse concatenates weighted blocks") {
  Eigen::VectorXd phi(1), chi(1), psi(1);
  phi << 3;
  chi << 6;
  psi << 9;
  FusionWeights thirds{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  Eigen::VectorXd z = fuse(phi, chi, psi, thirds);
  REQUIRE(z.size() == 3);
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(2.0));
  CHECK(z[2] == doctest::Approx(3.0));

  FusionWeights lift_only{1.0, 0.0, 0.0};
  Eigen::VectorXd only = fuse(phi, chi, psi, lift_only);
  CHECK(only[0] == doctest::Approx(3.0));
  CHECK(only[1] == doctest::Approx(0.0));
  CHECK(only[2] == doctest::Approx(0.0));

  Eigen::VectorXd none(0);
  CHECK(fuse(phi, none, none, lift_only).size() == 1);
}

TEST_CASE("fusion weights must form a simplex point") {
  CHECK_THROWS(FusionWeights{0.5, 0.5, 0.5}.validate());
  CHECK_THROWS(FusionWeights{-0.5, 1.0, 0.5}.validate());
  FusionWeights ok{0.2, 0.3, 0.5};
  ok.validate();
}

TEST_CASE("mapper on a dataset without an uncertain set") {
  ldl::rng::Engine eng(31);
  auto ds = synthetic_dataset(20, 3, 2, eng);
  FeatureConfig fc;
  fc.pos_frac = 0.55;
  fc.neg_frac = 0.45;  // ceil(11) + floor(9) covers all 20
  auto mapper = fit_lsf_mapper(ds, 0, fc, 5);
  CHECK(mapper.uncertain_prototypes().centers.rows() == 0);
  CHECK(mapper.output_dim() ==
        mapper.phi_dim() + 2 * mapper.saps().total());
  Eigen::VectorXd z = mapper.transform(ds.features.row(0));
  CHECK(z.size() == mapper.output_dim());
}

TEST_CASE("m_j=1 everywhere collapses chi and psi") {
  ldl::rng::Engine eng(32);
  auto ds = synthetic_dataset(20, 3, 2, eng);
  FeatureConfig fc;  // sigma 0.1: m_j = ceil(0.7) = 1, m_j* = ceil(0.2) = 1
  auto mapper = fit_lsf_mapper(ds, 0, fc, 5);
  CHECK(mapper.positive_prototypes().cluster_count() == 1);
  CHECK(mapper.uncertain_prototypes().cluster_count() == 1);
  CHECK(mapper.saps().total() == 0);
  CHECK(mapper.output_dim() == 3);  // 2*m_j + m_j*
}

TEST_CASE("single-block dimension identity 2*m_j^2 + m_j*^2") {
  ldl::rng::Engine eng(33);
  auto ds = synthetic_dataset(150, 4, 3, eng);
  FeatureConfig fc;
  fc.pos_frac = 0.5;  // 75 positive
  fc.neg_frac = 0.3;  // 45 negative, 30 uncertain
  fc.target_block_size = 0;
  auto mapper = fit_lsf_mapper(ds, 1, fc, 9);
  const int m_j = mapper.positive_prototypes().cluster_count();
  const int m_js = mapper.uncertain_prototypes().cluster_count();
  CHECK(m_j == 5);   // ceil(0.1*45)
  CHECK(m_js == 3);  // ceil(0.1*30)
  CHECK(mapper.output_dim() == 2 * m_j * m_j + m_js * m_js);
  CHECK(mapper.output_dim() == 59);
}

TEST_CASE("SAP counts match brute-force pair enumeration under blocks") {
  ldl::rng::Engine eng(34);
  auto ds = synthetic_dataset(220, 4, 2, eng);
  FeatureConfig fc;
  fc.target_block_size = 4;
  auto mapper = fit_lsf_mapper(ds, 0, fc, 13);
  CHECK(mapper.saps().sap_p.rows() ==
        brute_force_sap_count(mapper.positive_prototypes(),
                              mapper.positive_blocks()));
  CHECK(mapper.saps().sap_n.rows() ==
        brute_force_sap_count(mapper.negative_prototypes(),
                              mapper.negative_blocks()));
  CHECK(mapper.saps().sap_u.rows() ==
        brute_force_sap_count(mapper.uncertain_prototypes(),
                              mapper.uncertain_blocks()));
}

TEST_CASE("transform is deterministic with stable shapes and ranges") {
  ldl::rng::Engine eng(35);
  auto ds = synthetic_dataset(80, 3, 2, eng);
  FeatureConfig fc;
  auto mapper = fit_lsf_mapper(ds, 0, fc, 21);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd x(3);
    for (int d = 0; d < 3; ++d) x[d] = eng.uniform(-4, 4);
    Eigen::VectorXd z1 = mapper.transform(x);
    Eigen::VectorXd z2 = mapper.transform(x);
    CHECK(z1 == z2);
    CHECK(z1.size() == mapper.output_dim());

    Eigen::VectorXd phi, chi, psi;
    mapper.transform_parts(x, phi, chi, psi);
    CHECK(phi.minCoeff() >= 0.0);
    if (chi.size() > 0) CHECK(chi.minCoeff() >= 0.0);
    if (psi.size() > 0) {
      CHECK(psi.minCoeff() >= -1.0 - 1e-12);
      CHECK(psi.maxCoeff() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("lift-only weights reproduce phi in the leading block") {
  ldl::rng::Engine eng(36);
  auto ds = synthetic_dataset(60, 3, 2, eng);
  FeatureConfig fc;
  fc.fusion = {1.0, 0.0, 0.0};
  auto mapper = fit_lsf_mapper(ds, 1, fc, 2);
  Eigen::VectorXd x = ds.features.row(5);
  Eigen::VectorXd z = mapper.transform(x);
  Eigen::VectorXd phi, chi, psi;
  mapper.transform_parts(x, phi, chi, psi);
  CHECK((z.head(phi.size()) - phi).norm() == doctest::Approx(0.0));
  CHECK(z.tail(z.size() - phi.size()).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
}

TEST_CASE("standardizer round-trips and guards constant columns") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 5, 2, 5, 3, 5, 4, 5;
  ldl::Standardizer st;
  st.fit(X);
  Eigen::MatrixXd Z = st.transform(X);
  CHECK(Z.col(0).mean() == doctest::Approx(0.0));
  CHECK(Z.col(1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((st.transform_row(X.row(2)) - Z.row(2).transpose()).norm() < 1e-12);
}

TEST_CASE("mapper serialization round-trips the transform") {
  ldl::rng::Engine eng(37);
  auto ds = synthetic_dataset(100, 3, 2, eng);
  FeatureConfig fc;
  fc.fusion = {0.4, 0.35, 0.25};
  auto mapper = fit_lsf_mapper(ds, 0, fc, 8);

  std::stringstream ss;
  mapper.save(ss);
  auto loaded = LsfMapper::load(ss);
  CHECK(loaded.output_dim() == mapper.output_dim());
  CHECK(loaded.label_index() == mapper.label_index());
  Eigen::VectorXd x = ds.features.row(3);
  CHECK((loaded.transform(x) - mapper.transform(x)).norm() == 0.0);

  std::stringstream s1, s2;
  mapper.save(s1);
  loaded.save(s2);
  CHECK(s1.str() == s2.str());
}
