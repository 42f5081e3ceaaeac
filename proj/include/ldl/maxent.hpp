#pragma once

#include <Eigen/Dense>
#include <functional>
#include <istream>
#include <ostream>
#include <vector>

namespace ldl {

struct OptimizerConfig {
  double gradient_tolerance = 1e-6;
  int max_iterations = 200;
  double l2_penalty = 1e-6;

  void validate() const;
};

// Value-and-gradient oracle: fills `grad` and returns f(x).
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// BFGS with a strong-Wolfe line search (c1=1e-4, c2=0.9). Returns the first
// iterate whose gradient inf-norm drops below the tolerance, otherwise the
// best iterate seen within max_iterations. `trace`, when given, records the
// objective at every accepted iterate.
Eigen::VectorXd bfgs_minimize(const Objective& objective,
                              const Eigen::VectorXd& x0,
                              const OptimizerConfig& config,
                              std::vector<double>* trace = nullptr);

// Two-outcome maximum-entropy model for one label's description degree:
// q(z) = sigmoid(w.z + b), fitted by minimizing the binary KL divergence
// between target degrees and predictions (plus a small L2 term on w).
struct BaseModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  int label_index = -1;

  void save(std::ostream& os) const;
  static BaseModel load(std::istream& is);
};

BaseModel train_base(const Eigen::MatrixXd& features,
                     const Eigen::VectorXd& degrees,
                     const OptimizerConfig& config, int label_index = -1);

double predict_base(const BaseModel& model, const Eigen::VectorXd& z);

// Softmax maximum-entropy model over all p labels, fitted by minimizing the
// KL divergence between true distributions and softmax(W.f + b).
struct MetaModel {
  Eigen::MatrixXd weights;  // p x p
  Eigen::VectorXd bias;     // p

  void save(std::ostream& os) const;
  static MetaModel load(std::istream& is);
};

MetaModel train_meta(const Eigen::MatrixXd& second_level,
                     const Eigen::MatrixXd& truths,
                     const OptimizerConfig& config);

Eigen::VectorXd predict_meta(const MetaModel& model, const Eigen::VectorXd& f);

// Loss/gradient entry points shared with the finite-difference tests.
double base_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& clipped,
                      double l2, const Eigen::VectorXd& theta,
                      Eigen::VectorXd& grad);
double meta_objective(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Y,
                      double l2, const Eigen::VectorXd& theta,
                      Eigen::VectorXd& grad);

}  // namespace ldl
