#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ldl {

// Per-dataset ranks across algorithms with fractional tie averaging; the
// best score gets rank 1 and each row sums to s(s+1)/2.
struct RankTable {
  Eigen::MatrixXd scores;  // N datasets x s algorithms
  bool higher_is_better = false;
  Eigen::MatrixXd ranks;      // N x s
  Eigen::VectorXd avg_ranks;  // s
};

RankTable rank(const Eigen::MatrixXd& scores, bool higher_is_better);

// Friedman statistic. `saturated` marks the degenerate case where the
// algorithms are perfectly consistent across datasets and the F_F
// denominator vanishes (F_F carries no value then).
struct FriedmanResult {
  double chi_sq = 0.0;
  bool saturated = false;
  double f_f = 0.0;
};

FriedmanResult friedman(const RankTable& table);

// Nemenyi critical difference CD = q_alpha * sqrt(s(s+1)/(6N)).
double nemenyi_cd(int s, int N, double q_alpha);

// Studentized-range-based q values at alpha = 0.05 for s = 2..10.
double nemenyi_q_alpha_05(int s);

// Data behind a critical-difference diagram: algorithms ordered by average
// rank plus the maximal groups (size >= 2) whose rank spread stays below CD.
struct CdDiagram {
  double cd = 0.0;
  std::vector<int> order;            // algorithm indices, best rank first
  std::vector<double> sorted_ranks;  // avg ranks in that order
  std::vector<std::vector<int>> groups;  // algorithm indices per group
};

CdDiagram cd_diagram_data(const RankTable& table, double cd);

}  // namespace ldl
