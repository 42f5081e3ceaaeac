#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ldl::io {

// %.17g round-trips any double through decimal text exactly.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << fmt(v[i]);
  os << '\n';
}

inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << fmt(m(r, c));
    }
    os << '\n';
  }
}

inline Eigen::VectorXd read_vector(std::istream& is) {
  Eigen::Index n;
  if (!(is >> n) || n < 0) throw std::runtime_error("bad vector header");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(is >> v[i])) throw std::runtime_error("truncated vector");
  }
  return v;
}

inline Eigen::MatrixXd read_matrix(std::istream& is) {
  Eigen::Index r, c;
  if (!(is >> r >> c) || r < 0 || c < 0)
    throw std::runtime_error("bad matrix header");
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      if (!(is >> m(i, j))) throw std::runtime_error("truncated matrix");
  return m;
}

inline void expect_token(std::istream& is, const std::string& want) {
  std::string got;
  if (!(is >> got) || got != want)
    throw std::runtime_error("expected token '" + want + "', got '" + got + "'");
}

// FNV-1a, used for config and artifact fingerprints in run manifests.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace ldl::io
