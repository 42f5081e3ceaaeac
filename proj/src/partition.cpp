#include "ldl/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "ldl/numeric.hpp"

namespace ldl {

LabelPartition partition_by_percentile(const Eigen::VectorXd& degrees,
                                       double pos_frac, double neg_frac,
                                       int label_index) {
  const int n = static_cast<int>(degrees.size());
  if (n == 0) throw std::invalid_argument("partition: empty degree vector");
  if (pos_frac + neg_frac > 1.0 + 1e-12)
    throw std::invalid_argument("partition: pos_frac + neg_frac exceeds 1");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (degrees[a] != degrees[b]) return degrees[a] > degrees[b];
    return a < b;
  });

  const int n_pos = robust_ceil(pos_frac * n);
  const int n_neg = robust_floor(neg_frac * n);
  if (n_pos < 1 || n_neg < 1)
    throw std::runtime_error(
        "partition: positive or negative set would be empty (n=" +
        std::to_string(n) + ")");

  LabelPartition part;
  part.label_index = label_index;
  part.positive.assign(order.begin(), order.begin() + n_pos);
  part.negative.assign(order.end() - n_neg, order.end());
  part.uncertain.assign(order.begin() + n_pos, order.end() - n_neg);
  std::sort(part.positive.begin(), part.positive.end());
  std::sort(part.negative.begin(), part.negative.end());
  std::sort(part.uncertain.begin(), part.uncertain.end());
  return part;
}

LabelPartition partition_by_threshold(const Eigen::VectorXd& degrees,
                                      double tau_h, double tau_l,
                                      int label_index) {
  if (degrees.size() == 0)
    throw std::invalid_argument("partition: empty degree vector");
  if (tau_l > tau_h)
    throw std::invalid_argument("partition: tau_l exceeds tau_h");
  LabelPartition part;
  part.label_index = label_index;
  for (int i = 0; i < degrees.size(); ++i) {
    if (degrees[i] > tau_h)
      part.positive.push_back(i);
    else if (degrees[i] < tau_l)
      part.negative.push_back(i);
    else
      part.uncertain.push_back(i);
  }
  if (part.positive.empty() || part.negative.empty())
    throw std::runtime_error(
        "partition: thresholds leave positive or negative set empty");
  return part;
}

}  // namespace ldl
