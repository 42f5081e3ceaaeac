#include "ldl/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ldl {

namespace {

constexpr double kKlClip = 1e-12;

double kl_divergence(const Eigen::VectorXd& pred,
                     const Eigen::VectorXd& truth) {
  Eigen::VectorXd q = pred.cwiseMax(kKlClip);
  q /= q.sum();
  double kl = 0.0;
  for (Eigen::Index j = 0; j < truth.size(); ++j)
    if (truth[j] > 0.0) kl += truth[j] * std::log(truth[j] / q[j]);
  return kl;
}

}  // namespace

double MetricVector::operator[](int i) const {
  return const_cast<MetricVector*>(this)->at(i);
}

double& MetricVector::at(int i) {
  switch (i) {
    case 0: return chebyshev;
    case 1: return clark;
    case 2: return canberra;
    case 3: return kl;
    case 4: return cosine;
    case 5: return intersection;
  }
  throw std::out_of_range("MetricVector index");
}

const std::array<std::string, MetricVector::kCount>& MetricVector::names() {
  static const std::array<std::string, kCount> n = {
      "chebyshev", "clark", "canberra", "kl", "cosine", "intersection"};
  return n;
}

MetricVector evaluate(const Eigen::VectorXd& pred,
                      const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("evaluate: length mismatch");
  if (pred.size() < 2)
    throw std::invalid_argument("evaluate: need at least 2 labels");
  if (pred.minCoeff() < -1e-12 || truth.minCoeff() < -1e-12)
    throw std::invalid_argument("evaluate: negative entries");

  MetricVector m;
  double clark_sq = 0.0;
  double dot = 0.0, pred_sq = 0.0, truth_sq = 0.0;
  for (Eigen::Index j = 0; j < pred.size(); ++j) {
    const double diff = pred[j] - truth[j];
    const double sum = pred[j] + truth[j];
    m.chebyshev = std::max(m.chebyshev, std::abs(diff));
    if (sum > 0.0) {
      clark_sq += diff * diff / (sum * sum);
      m.canberra += std::abs(diff) / sum;
    }
    m.intersection += std::min(pred[j], truth[j]);
    dot += pred[j] * truth[j];
    pred_sq += pred[j] * pred[j];
    truth_sq += truth[j] * truth[j];
  }
  m.clark = std::sqrt(clark_sq);
  const double norms = std::sqrt(pred_sq) * std::sqrt(truth_sq);
  m.cosine = norms < 1e-12 ? 0.0 : dot / norms;
  m.kl = kl_divergence(pred, truth);
  return m;
}

TrialReport aggregate(const std::vector<MetricVector>& per_instance) {
  if (per_instance.empty())
    throw std::invalid_argument("aggregate: empty input");
  const double n = static_cast<double>(per_instance.size());
  double mean[MetricVector::kCount] = {};
  double sq[MetricVector::kCount] = {};
  for (const auto& v : per_instance)
    for (int i = 0; i < MetricVector::kCount; ++i) {
      mean[i] += v[i];
      sq[i] += v[i] * v[i];
    }
  TrialReport report;
  for (int i = 0; i < MetricVector::kCount; ++i) {
    const double mu = mean[i] / n;
    report.mean.at(i) = mu;
    report.stddev.at(i) = std::sqrt(std::max(0.0, sq[i] / n - mu * mu));
  }
  return report;
}

double mean_kl(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw std::invalid_argument("mean_kl: shape mismatch");
  if (pred.rows() == 0) throw std::invalid_argument("mean_kl: empty input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i)
    total += kl_divergence(pred.row(i), truth.row(i));
  return total / static_cast<double>(pred.rows());
}

}  // namespace ldl
