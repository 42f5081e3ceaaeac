#include "ldl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ldl {

RankTable rank(const Eigen::MatrixXd& scores, bool higher_is_better) {
  const int N = static_cast<int>(scores.rows());
  const int s = static_cast<int>(scores.cols());
  if (N < 2 || s < 2)
    throw std::invalid_argument("rank: need at least 2 datasets and 2 algorithms");
  if (!scores.allFinite())
    throw std::invalid_argument("rank: non-finite score");

  RankTable table;
  table.scores = scores;
  table.higher_is_better = higher_is_better;
  table.ranks.resize(N, s);

  std::vector<int> order(s);
  for (int i = 0; i < N; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double va = scores(i, a), vb = scores(i, b);
      if (va != vb) return higher_is_better ? va > vb : va < vb;
      return a < b;
    });
    // Fractional averaging over runs of equal scores.
    int start = 0;
    while (start < s) {
      int end = start;
      while (end + 1 < s &&
             scores(i, order[end + 1]) == scores(i, order[start]))
        ++end;
      const double avg = 0.5 * ((start + 1) + (end + 1));
      for (int k = start; k <= end; ++k) table.ranks(i, order[k]) = avg;
      start = end + 1;
    }
  }
  table.avg_ranks = table.ranks.colwise().mean();
  return table;
}

FriedmanResult friedman(const RankTable& table) {
  const double N = static_cast<double>(table.ranks.rows());
  const double s = static_cast<double>(table.ranks.cols());
  FriedmanResult res;
  res.chi_sq = 12.0 * N / (s * (s + 1.0)) *
               (table.avg_ranks.squaredNorm() - s * (s + 1.0) * (s + 1.0) / 4.0);
  const double denom = N * (s - 1.0) - res.chi_sq;
  if (denom <= 1e-12) {
    res.saturated = true;
    return res;
  }
  res.f_f = (N - 1.0) * res.chi_sq / denom;
  return res;
}

double nemenyi_cd(int s, int N, double q_alpha) {
  if (s < 2 || N < 1 || q_alpha <= 0.0)
    throw std::invalid_argument("nemenyi_cd: invalid arguments");
  return q_alpha * std::sqrt(s * (s + 1.0) / (6.0 * N));
}

double nemenyi_q_alpha_05(int s) {
  static const double q[] = {1.9600, 2.3430, 2.5690, 2.7280, 2.8500,
                             2.9490, 3.0310, 3.1020, 3.1640};
  if (s < 2 || s > 10)
    throw std::invalid_argument(
        "nemenyi_q_alpha_05: built-in table covers s = 2..10; pass q "
        "explicitly for larger comparisons");
  return q[s - 2];
}

CdDiagram cd_diagram_data(const RankTable& table, double cd) {
  const int s = static_cast<int>(table.avg_ranks.size());
  CdDiagram diagram;
  diagram.cd = cd;
  diagram.order.resize(s);
  std::iota(diagram.order.begin(), diagram.order.end(), 0);
  std::sort(diagram.order.begin(), diagram.order.end(), [&](int a, int b) {
    if (table.avg_ranks[a] != table.avg_ranks[b])
      return table.avg_ranks[a] < table.avg_ranks[b];
    return a < b;
  });
  diagram.sorted_ranks.resize(s);
  for (int i = 0; i < s; ++i)
    diagram.sorted_ranks[i] = table.avg_ranks[diagram.order[i]];

  // Maximal windows of >= 2 algorithms whose extreme ranks differ by < cd.
  int prev_start = -1;
  for (int end = 1; end < s; ++end) {
    int start = end - 1;
    while (start > 0 &&
           diagram.sorted_ranks[end] - diagram.sorted_ranks[start - 1] < cd)
      --start;
    if (diagram.sorted_ranks[end] - diagram.sorted_ranks[start] >= cd) continue;
    if (start == prev_start) {
      // extend the previous group instead of emitting a contained one
      diagram.groups.back().push_back(diagram.order[end]);
    } else {
      std::vector<int> group;
      for (int k = start; k <= end; ++k) group.push_back(diagram.order[k]);
      diagram.groups.push_back(std::move(group));
      prev_start = start;
    }
  }
  return diagram;
}

}  // namespace ldl
