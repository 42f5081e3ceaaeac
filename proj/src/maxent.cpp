#include "ldl/maxent.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "ldl/text_io.hpp"

namespace ldl {

namespace {

constexpr double kTargetClip = 1e-9;
constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;

double softplus(double z) {
  return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0);
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

struct LinePoint {
  double alpha;
  double f;
  double slope;  // g(x + alpha p) . p
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

class LineSearch {
 public:
  LineSearch(const Objective& obj, const Eigen::VectorXd& x,
             const Eigen::VectorXd& p, double f0, double slope0)
      : obj_(obj), x0_(x), p_(p), f0_(f0), slope0_(slope0) {}

  // Probes x0 + alpha p; non-finite values register as +inf so the caller
  // backs off.
  LinePoint eval(double alpha) {
    LinePoint pt;
    pt.alpha = alpha;
    pt.x = x0_ + alpha * p_;
    pt.g.resize(x0_.size());
    pt.f = obj_(pt.x, pt.g);
    if (!std::isfinite(pt.f) || !pt.g.allFinite()) {
      pt.f = std::numeric_limits<double>::infinity();
      pt.slope = 0.0;
    } else {
      pt.slope = pt.g.dot(p_);
    }
    return pt;
  }

  bool armijo(const LinePoint& pt) const {
    return pt.f <= f0_ + kC1 * pt.alpha * slope0_;
  }

  bool curvature(const LinePoint& pt) const {
    return std::abs(pt.slope) <= -kC2 * slope0_;
  }

  // Strong-Wolfe search: bracketing phase followed by bisection zoom.
  bool run(LinePoint& out) {
    LinePoint lo;
    lo.alpha = 0.0;
    lo.f = f0_;
    lo.slope = slope0_;

    LinePoint prev = lo;
    double alpha = 1.0;
    for (int i = 0; i < 30; ++i) {
      LinePoint pt = eval(alpha);
      if (!std::isfinite(pt.f) || !armijo(pt) || (i > 0 && pt.f >= prev.f))
        return zoom(prev, pt, out);
      if (curvature(pt)) {
        out = pt;
        return true;
      }
      if (pt.slope >= 0.0) return zoom(pt, prev, out);
      prev = pt;
      alpha = std::min(2.0 * alpha, 1e8);
    }
    if (std::isfinite(prev.f) && prev.alpha > 0.0 && armijo(prev)) {
      out = prev;
      return true;
    }
    return false;
  }

 private:
  bool zoom(LinePoint lo, LinePoint hi, LinePoint& out) {
    for (int i = 0; i < 60; ++i) {
      double alpha = 0.5 * (lo.alpha + hi.alpha);
      LinePoint pt = eval(alpha);
      if (!std::isfinite(pt.f) || !armijo(pt) || pt.f >= lo.f) {
        hi = pt;
      } else {
        if (curvature(pt)) {
          out = pt;
          return true;
        }
        if (pt.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = pt;
      }
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * (1.0 + lo.alpha)) break;
    }
    // Wolfe pair not isolated; settle for an Armijo point if we hold one.
    if (lo.alpha > 0.0 && std::isfinite(lo.f) && armijo(lo)) {
      out = lo;
      return true;
    }
    return false;
  }

  const Objective& obj_;
  const Eigen::VectorXd& x0_;
  const Eigen::VectorXd& p_;
  double f0_;
  double slope0_;
};

Eigen::VectorXd clip_targets(const Eigen::VectorXd& t) {
  Eigen::VectorXd out = t;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] = std::min(1.0 - kTargetClip, std::max(kTargetClip, out[i]));
  return out;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (gradient_tolerance <= 0.0 || max_iterations <= 0 || l2_penalty <= 0.0)
    throw std::invalid_argument("invalid optimizer configuration");
}

Eigen::VectorXd bfgs_minimize(const Objective& objective,
                              const Eigen::VectorXd& x0,
                              const OptimizerConfig& config,
                              std::vector<double>* trace) {
  config.validate();
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd g(n);
  double f = objective(x, g);
  if (!std::isfinite(f) || !g.allFinite())
    throw std::runtime_error("bfgs: non-finite objective at starting point");
  if (trace) trace->push_back(f);

  Eigen::VectorXd best_x = x;
  double best_f = f;
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= config.gradient_tolerance) return x;

    Eigen::VectorXd p = -(H * g);
    double slope = p.dot(g);
    if (slope >= 0.0) {
      H.setIdentity();
      p = -g;
      slope = p.dot(g);
      if (slope >= 0.0) break;  // gradient numerically zero
    }

    LineSearch search(objective, x, p, f, slope);
    LinePoint pt;
    if (!search.run(pt)) break;  // no further progress along any step

    Eigen::VectorXd s = pt.x - x;
    Eigen::VectorXd y = pt.g - g;
    const double sy = s.dot(y);
    if (iter == 0 && sy > 0.0) {
      double yy = y.squaredNorm();
      if (yy > 0.0) H *= sy / yy;
    }
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      Eigen::VectorXd Hy = H * y;
      H.noalias() += (rho * rho * (sy + y.dot(Hy))) * (s * s.transpose());
      H.noalias() -= rho * (Hy * s.transpose() + s * Hy.transpose());
    }

    x = pt.x;
    f = pt.f;
    g = pt.g;
    if (trace) trace->push_back(f);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  if (g.lpNorm<Eigen::Infinity>() <= config.gradient_tolerance) return x;
  return f <= best_f ? x : best_x;
}

double base_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& tc,
                      double l2, const Eigen::VectorXd& theta,
                      Eigen::VectorXd& grad) {
  const Eigen::Index d = Z.cols();
  const auto w = theta.head(d);
  const double b = theta[d];

  Eigen::VectorXd eta = Z * w;
  eta.array() += b;

  double f = 0.0;
  Eigen::VectorXd residual(Z.rows());
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const double t = tc[i];
    // KL(t || q) for two outcomes, written with softplus for stability.
    f += t * std::log(t) + (1.0 - t) * std::log(1.0 - t) +
         t * softplus(-eta[i]) + (1.0 - t) * softplus(eta[i]);
    residual[i] = sigmoid(eta[i]) - t;
  }
  f += l2 * w.squaredNorm();

  grad.resize(theta.size());
  grad.head(d) = Z.transpose() * residual + 2.0 * l2 * w;
  grad[d] = residual.sum();
  return f;
}

BaseModel train_base(const Eigen::MatrixXd& features,
                     const Eigen::VectorXd& degrees,
                     const OptimizerConfig& config, int label_index) {
  if (features.rows() < 2)
    throw std::invalid_argument("train_base: need at least 2 instances");
  if (features.rows() != degrees.size())
    throw std::invalid_argument("train_base: feature/degree count mismatch");
  for (Eigen::Index i = 0; i < degrees.size(); ++i)
    if (!(degrees[i] >= 0.0 && degrees[i] <= 1.0))
      throw std::invalid_argument("train_base: degree outside [0,1]");

  const Eigen::VectorXd tc = clip_targets(degrees);
  const double l2 = config.l2_penalty;
  Objective obj = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    return base_objective(features, tc, l2, theta, grad);
  };
  Eigen::VectorXd theta =
      bfgs_minimize(obj, Eigen::VectorXd::Zero(features.cols() + 1), config);

  BaseModel model;
  model.weights = theta.head(features.cols());
  model.bias = theta[features.cols()];
  model.label_index = label_index;
  return model;
}

double predict_base(const BaseModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.weights.size())
    throw std::invalid_argument("predict_base: dimension mismatch");
  double q = sigmoid(model.weights.dot(z) + model.bias);
  return std::min(1.0 - 1e-12, std::max(1e-12, q));
}

double meta_objective(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Y,
                      double l2, const Eigen::VectorXd& theta,
                      Eigen::VectorXd& grad) {
  const Eigen::Index n = F.rows();
  const Eigen::Index p = Y.cols();
  Eigen::Map<const Eigen::MatrixXd> W(theta.data(), p, p);
  Eigen::Map<const Eigen::VectorXd> b(theta.data() + p * p, p);

  Eigen::MatrixXd logits = F * W.transpose();
  logits.rowwise() += b.transpose();

  double f = 0.0;
  Eigen::MatrixXd residual(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    const Eigen::ArrayXd shifted = logits.row(i).transpose().array() - mx;
    const double lse = std::log(shifted.exp().sum()) + mx;
    double row_mass = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double y = Y(i, j);
      row_mass += y;
      if (y > 0.0) f += y * (std::log(y) - (logits(i, j) - lse));
    }
    residual.row(i) =
        row_mass * (logits.row(i).array() - lse).exp().matrix() - Y.row(i);
  }
  f += l2 * W.squaredNorm();

  grad.resize(theta.size());
  Eigen::Map<Eigen::MatrixXd> gW(grad.data(), p, p);
  Eigen::Map<Eigen::VectorXd> gb(grad.data() + p * p, p);
  gW = residual.transpose() * F + 2.0 * l2 * W;
  gb = residual.colwise().sum();
  return f;
}

MetaModel train_meta(const Eigen::MatrixXd& second_level,
                     const Eigen::MatrixXd& truths,
                     const OptimizerConfig& config) {
  const Eigen::Index n = second_level.rows();
  const Eigen::Index p = truths.cols();
  if (n == 0 || second_level.cols() != p || truths.rows() != n)
    throw std::invalid_argument("train_meta: shape mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(truths.row(i).sum() - 1.0) > 1e-6 ||
        truths.row(i).minCoeff() < -1e-12)
      throw std::invalid_argument("train_meta: truth row " +
                                  std::to_string(i + 1) + " off the simplex");
  }
  if (n < p)
    std::cerr << "[ldl] warning: meta training with fewer validation rows ("
              << n << ") than labels (" << p << ")\n";

  const double l2 = config.l2_penalty;
  Objective obj = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    return meta_objective(second_level, truths, l2, theta, grad);
  };
  Eigen::VectorXd theta =
      bfgs_minimize(obj, Eigen::VectorXd::Zero(p * p + p), config);

  MetaModel model;
  model.weights = Eigen::Map<Eigen::MatrixXd>(theta.data(), p, p);
  model.bias = theta.tail(p);
  return model;
}

Eigen::VectorXd predict_meta(const MetaModel& model,
                             const Eigen::VectorXd& f) {
  if (f.size() != model.weights.cols())
    throw std::invalid_argument("predict_meta: dimension mismatch");
  Eigen::VectorXd logits = model.weights * f + model.bias;
  const double mx = logits.maxCoeff();
  Eigen::VectorXd q = (logits.array() - mx).exp();
  for (Eigen::Index j = 0; j < q.size(); ++j)
    q[j] = std::max(q[j], 1e-300);  // keep entries strictly positive
  return q / q.sum();
}

void BaseModel::save(std::ostream& os) const {
  os << "ldl-base 1\n" << label_index << ' ' << io::fmt(bias) << '\n';
  io::write_vector(os, weights);
}

BaseModel BaseModel::load(std::istream& is) {
  io::expect_token(is, "ldl-base");
  int version;
  is >> version;
  if (version != 1) throw std::runtime_error("unsupported base model version");
  BaseModel m;
  is >> m.label_index >> m.bias;
  m.weights = io::read_vector(is);
  return m;
}

void MetaModel::save(std::ostream& os) const {
  os << "ldl-meta 1\n";
  io::write_matrix(os, weights);
  io::write_vector(os, bias);
}

MetaModel MetaModel::load(std::istream& is) {
  io::expect_token(is, "ldl-meta");
  int version;
  is >> version;
  if (version != 1) throw std::runtime_error("unsupported meta model version");
  MetaModel m;
  m.weights = io::read_matrix(is);
  m.bias = io::read_vector(is);
  return m;
}

}  // namespace ldl
