#include <doctest.h>

#include <algorithm>
#include <set>

#include "ldl/partition.hpp"
#include "ldl/rng.hpp"

using ldl::LabelPartition;
using ldl::partition_by_percentile;

namespace {

Eigen::VectorXd distinct_degrees(int n) {
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = (i * 7919 % n) / static_cast<double>(n);
  return d;
}

void check_disjoint_cover(const LabelPartition& part, int n) {
  std::set<int> all;
  for (int i : part.positive) all.insert(i);
  for (int i : part.negative) all.insert(i);
  for (int i : part.uncertain) all.insert(i);
  CHECK(all.size() ==
        part.positive.size() + part.negative.size() + part.uncertain.size());
  CHECK(static_cast<int>(all.size()) == n);
}

}  // namespace

TEST_CASE("default percentiles on 20 distinct degrees give 11/7/2") {
  auto part = partition_by_percentile(distinct_degrees(20));
  CHECK(part.positive.size() == 11);
  CHECK(part.negative.size() == 7);
  CHECK(part.uncertain.size() == 2);
  check_disjoint_cover(part, 20);
}

TEST_CASE("equal degrees split by the index tie-break") {
  Eigen::VectorXd d = Eigen::VectorXd::Constant(10, 0.1);
  auto part = partition_by_percentile(d);
  // ceil(5.5)=6 positive, floor(3.5)=3 negative
  CHECK(part.positive == std::vector<int>({0, 1, 2, 3, 4, 5}));
  CHECK(part.negative == std::vector<int>({7, 8, 9}));
  CHECK(part.uncertain == std::vector<int>({6}));
}

TEST_CASE("three instances leave no uncertain set") {
  Eigen::VectorXd d(3);
  d << 0.2, 0.5, 0.3;
  auto part = partition_by_percentile(d);
  CHECK(part.positive.size() == 2);
  CHECK(part.negative.size() == 1);
  CHECK(part.uncertain.empty());
}

TEST_CASE("degenerate requests are rejected") {
  Eigen::VectorXd d(4);
  d << 0.1, 0.2, 0.3, 0.4;
  CHECK_THROWS(partition_by_percentile(d, 0.7, 0.5));
  CHECK_THROWS(partition_by_percentile(Eigen::VectorXd()));
  // n=2: ceil(1.1)=2 positive leaves the negative set empty
  Eigen::VectorXd two(2);
  two << 0.4, 0.6;
  CHECK_THROWS(partition_by_percentile(two));
}

TEST_CASE("monotonicity: positive >= uncertain >= negative degrees") {
  ldl::rng::Engine eng(5);
  for (int t = 0; t < 100; ++t) {
    int n = 3 + static_cast<int>(eng.bounded(60));
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = eng.uniform();
    auto part = partition_by_percentile(d);
    check_disjoint_cover(part, n);
    double min_pos = 2.0, max_neg = -1.0, min_unc = 2.0, max_unc = -1.0;
    for (int i : part.positive) min_pos = std::min(min_pos, d[i]);
    for (int i : part.negative) max_neg = std::max(max_neg, d[i]);
    for (int i : part.uncertain) {
      min_unc = std::min(min_unc, d[i]);
      max_unc = std::max(max_unc, d[i]);
    }
    if (!part.uncertain.empty()) {
      CHECK(min_pos >= max_unc);
      CHECK(min_unc >= max_neg);
    } else {
      CHECK(min_pos >= max_neg);
    }
  }
}

TEST_CASE("permuting the input permutes only the labels of the sets") {
  ldl::rng::Engine eng(9);
  Eigen::VectorXd d(15);
  for (int i = 0; i < 15; ++i) d[i] = eng.uniform();
  auto base = partition_by_percentile(d);

  std::vector<int> perm(15);
  for (int i = 0; i < 15; ++i) perm[i] = i;
  ldl::rng::shuffle(perm, eng);
  Eigen::VectorXd dp(15);
  for (int i = 0; i < 15; ++i) dp[i] = d[perm[i]];
  auto permuted = partition_by_percentile(dp);

  auto degrees_of = [&](const std::vector<int>& idx,
                        const Eigen::VectorXd& src) {
    std::vector<double> v;
    for (int i : idx) v.push_back(src[i]);
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(degrees_of(base.positive, d) == degrees_of(permuted.positive, dp));
  CHECK(degrees_of(base.negative, d) == degrees_of(permuted.negative, dp));
  CHECK(degrees_of(base.uncertain, d) == degrees_of(permuted.uncertain, dp));
}

TEST_CASE("threshold partition follows the literal rule") {
  Eigen::VectorXd d(5);
  d << 0.9, 0.5, 0.1, 0.7, 0.3;
  auto part = ldl::partition_by_threshold(d, 0.6, 0.4);
  CHECK(part.positive == std::vector<int>({0, 3}));
  CHECK(part.uncertain == std::vector<int>({1}));
  CHECK(part.negative == std::vector<int>({2, 4}));
  CHECK_THROWS(ldl::partition_by_threshold(d, 0.95, 0.0));  // empty negative
}
