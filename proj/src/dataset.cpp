#include "ldl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ldl/numeric.hpp"
#include "ldl/rng.hpp"
#include "ldl/text_io.hpp"

namespace ldl {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error(what);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

double parse_value(const std::string& token, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(token, &pos);
    if (pos != token.size()) fail("line " + std::to_string(line_no) +
                                  ": bad numeric value '" + token + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail("line " + std::to_string(line_no) + ": bad numeric value '" + token +
         "'");
  } catch (const std::out_of_range&) {
    fail("line " + std::to_string(line_no) + ": value out of range '" + token +
         "'");
  }
}

LabelDistributionDataset load_canonical(std::istream& is,
                                        const std::string& name) {
  std::string line;
  if (!std::getline(is, line)) fail(name + ": empty file");
  strip_cr(line);
  std::istringstream header(line);
  long n, m, p;
  if (!(header >> n >> m >> p) || n <= 0 || m <= 0 || p <= 0)
    fail(name + ": malformed header, expected 'n m p'");

  LabelDistributionDataset ds;
  ds.name = name;
  ds.features.resize(n, m);
  ds.distributions.resize(n, p);

  for (long i = 0; i < n; ++i) {
    if (!std::getline(is, line))
      fail(name + ": expected " + std::to_string(n) + " rows, got " +
           std::to_string(i));
    strip_cr(line);
    const int line_no = static_cast<int>(i) + 2;
    std::istringstream row(line);
    std::string tok;
    long col = 0;
    bool past_bar = false;
    long ycol = 0;
    while (row >> tok) {
      if (tok == "|") {
        if (past_bar || col != m)
          fail("line " + std::to_string(line_no) + ": separator after " +
               std::to_string(col) + " values, expected " + std::to_string(m));
        past_bar = true;
        continue;
      }
      double v = parse_value(tok, line_no);
      if (!past_bar) {
        if (col >= m)
          fail("line " + std::to_string(line_no) + ": row length != m+p");
        ds.features(i, col++) = v;
      } else {
        if (ycol >= p)
          fail("line " + std::to_string(line_no) + ": row length != m+p");
        ds.distributions(i, ycol++) = v;
      }
    }
    if (!past_bar || col != m || ycol != p)
      fail("line " + std::to_string(line_no) + ": row length != m+p");
  }
  return ds;
}

LabelDistributionDataset load_csv(std::istream& is, const std::string& name) {
  std::string line;
  if (!std::getline(is, line)) fail(name + ": empty file");
  strip_cr(line);
  auto cols = split_fields(line, ',');
  long m = 0, p = 0;
  for (const auto& c : cols) {
    if (c.size() > 1 && c[0] == 'f' && p == 0)
      ++m;
    else if (c.size() > 1 && c[0] == 'y')
      ++p;
    else
      fail(name + ": malformed CSV header column '" + c + "'");
  }
  if (m == 0 || p == 0) fail(name + ": CSV header must list f* then y* columns");

  std::vector<double> feat, dist;
  long n = 0;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line, ',');
    if (static_cast<long>(fields.size()) != m + p)
      fail("line " + std::to_string(line_no) + ": row length != m+p");
    for (long j = 0; j < m; ++j) feat.push_back(parse_value(fields[j], line_no));
    for (long j = 0; j < p; ++j)
      dist.push_back(parse_value(fields[m + j], line_no));
    ++n;
  }
  if (n == 0) fail(name + ": no data rows");

  LabelDistributionDataset ds;
  ds.name = name;
  ds.features.resize(n, m);
  ds.distributions.resize(n, p);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < m; ++j) ds.features(i, j) = feat[i * m + j];
    for (long j = 0; j < p; ++j) ds.distributions(i, j) = dist[i * p + j];
  }
  return ds;
}

std::string stem_of(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

void LabelDistributionDataset::validate(double tolerance) const {
  if (features.rows() != distributions.rows())
    fail(name + ": feature/distribution row mismatch");
  if (!features.allFinite()) fail(name + ": non-finite feature value");
  for (Eigen::Index i = 0; i < distributions.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < distributions.cols(); ++j) {
      double v = distributions(i, j);
      if (!std::isfinite(v) || v < -1e-12 || v > 1.0 + 1e-12)
        fail(name + ": row " + std::to_string(i + 1) +
             ": degree outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance)
      fail(name + ": row " + std::to_string(i + 1) +
           ": distribution sums to " + io::fmt(sum) + ", violates simplex");
  }
}

LabelDistributionDataset LabelDistributionDataset::subset(
    const std::vector<int>& rows) const {
  LabelDistributionDataset out;
  out.name = name;
  out.features.resize(rows.size(), features.cols());
  out.distributions.resize(rows.size(), distributions.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(i) = features.row(rows[i]);
    out.distributions.row(i) = distributions.row(rows[i]);
  }
  return out;
}

LabelDistributionDataset load_dataset(const std::string& path,
                                      DatasetFormat format,
                                      bool renormalize_rows) {
  std::ifstream is(path);
  if (!is) fail("cannot open dataset file: " + path);
  LabelDistributionDataset ds = format == DatasetFormat::kCanonicalText
                                    ? load_canonical(is, stem_of(path))
                                    : load_csv(is, stem_of(path));
  if (renormalize_rows) ds = renormalize(ds);
  ds.validate();
  return ds;
}

void save_dataset(const LabelDistributionDataset& dataset,
                  const std::string& path, DatasetFormat format) {
  std::ofstream os(path);
  if (!os) fail("cannot write dataset file: " + path);
  const auto& X = dataset.features;
  const auto& Y = dataset.distributions;
  if (format == DatasetFormat::kCanonicalText) {
    os << X.rows() << ' ' << X.cols() << ' ' << Y.cols() << '\n';
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < X.cols(); ++j) os << io::fmt(X(i, j)) << ' ';
      os << '|';
      for (Eigen::Index j = 0; j < Y.cols(); ++j) os << ' ' << io::fmt(Y(i, j));
      os << '\n';
    }
  } else {
    for (Eigen::Index j = 0; j < X.cols(); ++j) os << 'f' << (j + 1) << ',';
    for (Eigen::Index j = 0; j < Y.cols(); ++j)
      os << 'y' << (j + 1) << (j + 1 == Y.cols() ? '\n' : ',');
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < X.cols(); ++j) os << io::fmt(X(i, j)) << ',';
      for (Eigen::Index j = 0; j < Y.cols(); ++j)
        os << io::fmt(Y(i, j)) << (j + 1 == Y.cols() ? '\n' : ',');
    }
  }
  if (!os) fail("write failed: " + path);
}

LabelDistributionDataset renormalize(const LabelDistributionDataset& dataset,
                                     double tolerance) {
  LabelDistributionDataset out = dataset;
  for (Eigen::Index i = 0; i < out.distributions.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < out.distributions.cols(); ++j) {
      double v = out.distributions(i, j);
      if (v < 0.0)
        fail(dataset.name + ": row " + std::to_string(i + 1) +
             ": negative degree, cannot renormalize");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance)
      fail(dataset.name + ": row " + std::to_string(i + 1) +
           ": distribution sums to " + io::fmt(sum) +
           ", outside renormalization tolerance " + io::fmt(tolerance));
    out.distributions.row(i) /= sum;
  }
  return out;
}

SplitIndices split_random(int n, double fraction, std::uint64_t seed) {
  if (n < 2) fail("split_random: need at least 2 instances");
  if (!(fraction > 0.0 && fraction < 1.0))
    fail("split_random: fraction must lie in (0,1)");
  const int n_train = round_half_up(fraction * n);
  if (n_train <= 0 || n_train >= n)
    fail("split_random: fraction yields an empty train or test set");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng::Engine eng(seed);
  rng::shuffle(order, eng);

  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace ldl
