#include "ldl/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ldl/metrics.hpp"
#include "ldl/numeric.hpp"
#include "ldl/parallel.hpp"
#include "ldl/rng.hpp"
#include "ldl/text_io.hpp"

namespace ldl {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Per-label fitted state plus the raw feature blocks for every training row.
struct LabelFeatures {
  LsfMapper mapper;
  Eigen::MatrixXd phi, chi, psi;  // n_train rows each
};

LabelFeatures fit_label_features(const LabelDistributionDataset& std_train,
                                 int label, const FeatureConfig& fc,
                                 std::uint64_t seed) {
  LabelFeatures lf;
  lf.mapper =
      fit_lsf_mapper(std_train, label, fc, rng::derive(seed, rng::kLabelFit,
                                                       label));
  const int n = std_train.instance_count();
  lf.phi.resize(n, lf.mapper.phi_dim());
  lf.chi.resize(n, lf.mapper.saps().total());
  lf.psi.resize(n, lf.mapper.saps().total());
  Eigen::VectorXd phi, chi, psi;
  for (int i = 0; i < n; ++i) {
    lf.mapper.transform_parts(std_train.features.row(i), phi, chi, psi);
    lf.phi.row(i) = phi;
    lf.chi.row(i) = chi;
    lf.psi.row(i) = psi;
  }
  return lf;
}

Eigen::MatrixXd fused_rows(const LabelFeatures& lf, const std::vector<int>& rows,
                           const FusionWeights& w) {
  Eigen::MatrixXd Z(rows.size(), lf.phi.cols() + lf.chi.cols() + lf.psi.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    Z.row(i).head(lf.phi.cols()) = w.lambda * lf.phi.row(r);
    Z.row(i).segment(lf.phi.cols(), lf.chi.cols()) = w.mu * lf.chi.row(r);
    Z.row(i).tail(lf.psi.cols()) = w.epsilon * lf.psi.row(r);
  }
  return Z;
}

Eigen::VectorXd column_at(const Eigen::MatrixXd& Y, const std::vector<int>& rows,
                          int col) {
  Eigen::VectorXd v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = Y(rows[i], col);
  return v;
}

std::uint64_t geometry_fingerprint(const std::vector<LsfMapper>& mappers) {
  std::ostringstream ss;
  for (const auto& m : mappers) {
    io::write_matrix(ss, m.positive_prototypes().centers);
    io::write_matrix(ss, m.negative_prototypes().centers);
    io::write_matrix(ss, m.uncertain_prototypes().centers);
    for (int b : m.positive_blocks().block_of) ss << b << ' ';
    for (int b : m.negative_blocks().block_of) ss << b << ' ';
    for (int b : m.uncertain_blocks().block_of) ss << b << ' ';
    io::write_matrix(ss, m.saps().sap_p);
    io::write_matrix(ss, m.saps().sap_n);
    io::write_matrix(ss, m.saps().sap_u);
  }
  return io::fnv1a(ss.str());
}

}  // namespace

void TrainConfig::validate() const {
  features.validate();
  optimizer.validate();
  if (!(tr_fraction > 0.0 && tr_fraction < 1.0))
    throw std::invalid_argument("tr_fraction must lie in (0,1)");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

TrainedPipeline train(const LabelDistributionDataset& training,
                      const TrainConfig& config, TrainManifest* manifest) {
  config.validate();
  const int n = training.instance_count();
  const int p = training.label_count();
  if (n < 4)
    throw std::invalid_argument("train: need at least 4 training instances");

  const auto t0 = std::chrono::steady_clock::now();

  TrainedPipeline pipe;
  pipe.tr_fraction_ = config.tr_fraction;
  pipe.seed_ = config.seed;
  pipe.standardizer_.fit(training.features);

  LabelDistributionDataset std_train;
  std_train.name = training.name;
  std_train.features = pipe.standardizer_.transform(training.features);
  std_train.distributions = training.distributions;

  // One Tr/Val split shared by all labels so the Val predictions align
  // row-wise for the meta stage.
  SplitIndices trval = split_random(
      n, config.tr_fraction, rng::derive(config.seed, rng::kTrValSplit));

  std::vector<LabelFeatures> features(p);
  parallel_for(p, config.workers, [&](int j) {
    features[j] =
        fit_label_features(std_train, j, config.features, config.seed);
  });
  const double fit_seconds = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  pipe.mappers_.resize(p);
  pipe.base_models_.resize(p);
  Eigen::MatrixXd pre_val(trval.test.size(), p);
  parallel_for(p, config.workers, [&](int j) {
    const FusionWeights& w = config.features.fusion;
    Eigen::MatrixXd z_tr = fused_rows(features[j], trval.train, w);
    Eigen::VectorXd t_tr =
        column_at(std_train.distributions, trval.train, j);
    BaseModel base = train_base(z_tr, t_tr, config.optimizer, j);

    Eigen::MatrixXd z_val = fused_rows(features[j], trval.test, w);
    for (Eigen::Index i = 0; i < z_val.rows(); ++i)
      pre_val(i, j) = predict_base(base, z_val.row(i));

    pipe.mappers_[j] = std::move(features[j].mapper);
    pipe.base_models_[j] = std::move(base);
  });

  Eigen::MatrixXd y_val(trval.test.size(), p);
  for (std::size_t i = 0; i < trval.test.size(); ++i)
    y_val.row(i) = std_train.distributions.row(trval.test[i]);
  pipe.meta_ = train_meta(pre_val, y_val, config.optimizer);

  if (manifest) {
    manifest->seed = config.seed;
    manifest->n_train = n;
    manifest->n_tr = static_cast<int>(trval.train.size());
    manifest->n_val = static_cast<int>(trval.test.size());
    manifest->label_dims.clear();
    for (const auto& m : pipe.mappers_) {
      LabelDimensions d;
      d.m_j = static_cast<int>(m.positive_prototypes().centers.rows());
      d.m_j_star = static_cast<int>(m.uncertain_prototypes().centers.rows());
      d.sap_count = m.saps().total();
      d.output_dim = m.output_dim();
      manifest->label_dims.push_back(d);
    }
    manifest->geometry_hash = geometry_fingerprint(pipe.mappers_);
    manifest->fit_seconds = fit_seconds;
    manifest->model_seconds = seconds_since(t1);
  }
  return pipe;
}

Eigen::VectorXd TrainedPipeline::predict(const Eigen::VectorXd& x) const {
  if (x.size() != standardizer_.mean.size())
    throw std::invalid_argument("predict: dimension mismatch");
  const Eigen::VectorXd xs = standardizer_.transform_row(x);
  Eigen::VectorXd f(label_count());
  for (int j = 0; j < label_count(); ++j)
    f[j] = predict_base(base_models_[j], mappers_[j].transform(xs));
  return predict_meta(meta_, f);
}

Eigen::MatrixXd TrainedPipeline::predict_batch(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out(X.rows(), label_count());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out.row(i) = predict(X.row(i));
  return out;
}

void TrainedPipeline::save(std::ostream& os) const {
  os << "ldl-pipeline 1\n";
  os << label_count() << ' ' << io::fmt(tr_fraction_) << ' ' << seed_ << '\n';
  io::write_vector(os, standardizer_.mean);
  io::write_vector(os, standardizer_.scale);
  for (const auto& m : mappers_) m.save(os);
  for (const auto& b : base_models_) b.save(os);
  meta_.save(os);
}

void TrainedPipeline::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write pipeline file: " + path);
  save(os);
}

TrainedPipeline TrainedPipeline::load(std::istream& is) {
  io::expect_token(is, "ldl-pipeline");
  int version;
  is >> version;
  if (version != 1) throw std::runtime_error("unsupported pipeline version");
  TrainedPipeline pipe;
  int p;
  is >> p >> pipe.tr_fraction_ >> pipe.seed_;
  pipe.standardizer_.mean = io::read_vector(is);
  pipe.standardizer_.scale = io::read_vector(is);
  pipe.mappers_.reserve(p);
  for (int j = 0; j < p; ++j) pipe.mappers_.push_back(LsfMapper::load(is));
  pipe.base_models_.reserve(p);
  for (int j = 0; j < p; ++j) pipe.base_models_.push_back(BaseModel::load(is));
  pipe.meta_ = MetaModel::load(is);
  if (!is) throw std::runtime_error("truncated pipeline");
  for (int j = 0; j < p; ++j) {
    if (pipe.base_models_[j].weights.size() != pipe.mappers_[j].output_dim())
      throw std::runtime_error(
          "pipeline file inconsistent: base model " + std::to_string(j) +
          " does not match its mapper's feature dimension");
  }
  if (pipe.meta_.weights.rows() != p || pipe.meta_.weights.cols() != p)
    throw std::runtime_error("pipeline file inconsistent: meta model shape");
  return pipe;
}

TrainedPipeline TrainedPipeline::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open pipeline file: " + path);
  return load(is);
}

std::vector<FusionWeights> fusion_grid(double step) {
  if (!(step > 0.0 && step <= 1.0))
    throw std::invalid_argument("fusion_grid: step must lie in (0,1]");
  const int S = round_half_up(1.0 / step);
  if (std::abs(S * step - 1.0) > 1e-9)
    throw std::invalid_argument("fusion_grid: step must divide 1 evenly");
  std::vector<FusionWeights> grid;
  for (int i = 0; i <= S; ++i) {
    for (int j = 0; j + i <= S; ++j) {
      FusionWeights w;
      w.lambda = i * step;
      w.mu = j * step;
      w.epsilon = std::max(0.0, 1.0 - w.lambda - w.mu);
      grid.push_back(w);
    }
  }
  return grid;
}

FusionWeights grid_search_fusion(const LabelDistributionDataset& training,
                                 const TrainConfig& config, double step,
                                 GridSearchReport* report,
                                 bool restrict_mu_zero,
                                 bool restrict_epsilon_zero) {
  config.validate();
  const int n = training.instance_count();
  const int p = training.label_count();
  if (n < 4)
    throw std::invalid_argument("grid_search: need at least 4 instances");

  Standardizer standardizer;
  standardizer.fit(training.features);
  LabelDistributionDataset std_train;
  std_train.name = training.name;
  std_train.features = standardizer.transform(training.features);
  std_train.distributions = training.distributions;

  SplitIndices trval = split_random(
      n, config.tr_fraction, rng::derive(config.seed, rng::kTrValSplit));

  // Clustering is weight-independent, so the mappers and raw feature
  // blocks are fitted once and shared by every lattice point.
  std::vector<LabelFeatures> features(p);
  parallel_for(p, config.workers, [&](int j) {
    features[j] =
        fit_label_features(std_train, j, config.features, config.seed);
  });

  Eigen::MatrixXd y_val(trval.test.size(), p);
  for (std::size_t i = 0; i < trval.test.size(); ++i)
    y_val.row(i) = std_train.distributions.row(trval.test[i]);

  std::vector<FusionWeights> grid = fusion_grid(step);
  if (restrict_mu_zero || restrict_epsilon_zero) {
    std::vector<FusionWeights> filtered;
    for (const auto& w : grid) {
      if (restrict_mu_zero && w.mu != 0.0) continue;
      if (restrict_epsilon_zero && w.epsilon != 0.0) continue;
      filtered.push_back(w);
    }
    grid = std::move(filtered);
  }

  std::vector<double> val_kl(grid.size());
  parallel_for(static_cast<int>(grid.size()), config.workers, [&](int g) {
    const FusionWeights& w = grid[g];
    Eigen::MatrixXd pre_val(trval.test.size(), p);
    for (int j = 0; j < p; ++j) {
      Eigen::MatrixXd z_tr = fused_rows(features[j], trval.train, w);
      Eigen::VectorXd t_tr = column_at(std_train.distributions, trval.train, j);
      BaseModel base = train_base(z_tr, t_tr, config.optimizer, j);
      Eigen::MatrixXd z_val = fused_rows(features[j], trval.test, w);
      for (Eigen::Index i = 0; i < z_val.rows(); ++i)
        pre_val(i, j) = predict_base(base, z_val.row(i));
    }
    MetaModel meta = train_meta(pre_val, y_val, config.optimizer);
    Eigen::MatrixXd pred(trval.test.size(), p);
    for (Eigen::Index i = 0; i < pred.rows(); ++i)
      pred.row(i) = predict_meta(meta, pre_val.row(i));
    val_kl[g] = mean_kl(pred, y_val);
  });

  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (val_kl[g] < val_kl[best]) best = g;  // lex order breaks ties

  if (report) {
    report->points.clear();
    for (std::size_t g = 0; g < grid.size(); ++g)
      report->points.push_back({grid[g], val_kl[g]});
    report->best = grid[best];
  }
  return grid[best];
}

}  // namespace ldl
