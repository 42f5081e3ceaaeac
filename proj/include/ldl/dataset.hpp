#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ldl {

// An LDL dataset: n instances, m features, and a p-dimensional label
// distribution per instance. Distribution rows live on the probability
// simplex. Immutable after construction; safe to share across threads.
struct LabelDistributionDataset {
  std::string name;
  Eigen::MatrixXd features;       // n x m
  Eigen::MatrixXd distributions;  // n x p

  int instance_count() const { return static_cast<int>(features.rows()); }
  int feature_count() const { return static_cast<int>(features.cols()); }
  int label_count() const { return static_cast<int>(distributions.cols()); }

  // Throws if any invariant is violated (entries in [0,1], rows sum to 1
  // within `tolerance`, finite features).
  void validate(double tolerance = 1e-6) const;

  LabelDistributionDataset subset(const std::vector<int>& rows) const;
};

enum class DatasetFormat { kCanonicalText, kCsv };

// Canonical text: first line "n m p", then one instance per line as
// m feature values, a literal "|", and p degrees. CSV: header row
// "f1,...,fm,y1,...,yp" followed by data rows.
LabelDistributionDataset load_dataset(const std::string& path,
                                      DatasetFormat format,
                                      bool renormalize_rows = false);

void save_dataset(const LabelDistributionDataset& dataset,
                  const std::string& path, DatasetFormat format);

// Divides each distribution row by its sum. Rows whose sum deviates from 1
// by more than `tolerance`, or with negative entries, are an error.
LabelDistributionDataset renormalize(const LabelDistributionDataset& dataset,
                                     double tolerance = 1e-3);

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

// Samples round-half-up(fraction*n) training indices without replacement.
// Deterministic in (n, fraction, seed); both index lists come back sorted.
SplitIndices split_random(int n, double fraction, std::uint64_t seed);

}  // namespace ldl
