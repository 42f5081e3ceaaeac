#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ldl {

// Per-label division of training instances into positive, negative, and
// uncertain sets. The three lists are pairwise disjoint and cover the
// training indices exactly.
struct LabelPartition {
  int label_index = -1;
  std::vector<int> positive;
  std::vector<int> negative;
  std::vector<int> uncertain;
};

// Percentile rule: instances sorted by degree descending (ties broken by
// ascending index); the first ceil(pos_frac*n) go to the positive set, the
// last floor(neg_frac*n) to the negative set, the remainder is uncertain.
// Throws if pos_frac+neg_frac > 1, the input is empty, or either the
// positive or the negative set would come out empty.
LabelPartition partition_by_percentile(const Eigen::VectorXd& degrees,
                                       double pos_frac = 0.55,
                                       double neg_frac = 0.35,
                                       int label_index = -1);

// Absolute-threshold form: degree > tau_h is positive, degree < tau_l is
// negative, the rest uncertain. Library-only alternative to the percentile
// rule; same non-empty requirements on positive and negative.
LabelPartition partition_by_threshold(const Eigen::VectorXd& degrees,
                                      double tau_h, double tau_l,
                                      int label_index = -1);

}  // namespace ldl
