#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace ldl {

// The six LDL evaluation metrics. Chebyshev, Clark, Canberra, and K-L are
// distances (lower is better); cosine and intersection are similarities.
struct MetricVector {
  double chebyshev = 0.0;
  double clark = 0.0;
  double canberra = 0.0;
  double kl = 0.0;
  double cosine = 0.0;
  double intersection = 0.0;

  double operator[](int i) const;
  double& at(int i);
  static constexpr int kCount = 6;
  static const std::array<std::string, kCount>& names();
  static bool higher_is_better(int i) { return i >= 4; }
};

// Evaluates all six metrics for one (prediction, truth) pair. Predictions
// are clipped to >= 1e-12 and renormalized before the K-L term only; Clark
// and Canberra terms where both entries are zero contribute zero.
MetricVector evaluate(const Eigen::VectorXd& pred,
                      const Eigen::VectorXd& truth);

struct TrialReport {
  MetricVector mean;
  MetricVector stddev;  // population standard deviation
};

TrialReport aggregate(const std::vector<MetricVector>& per_instance);

// Mean K-L divergence of row-wise predictions against truths; the grid
// search's selection criterion.
double mean_kl(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

}  // namespace ldl
