#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scoregraph/graph.hpp"

namespace scoregraph {

/// p_{h|l,m}: slice h is a C x C matrix with rows indexed by the evaluator
/// state l and columns by the evaluated state m.
template <typename Scalar>
class ScoreTensor {
 public:
  using Slice = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  ScoreTensor() = default;
  ScoreTensor(int num_scores, int num_states)
      : slices_(num_scores, Slice::Zero(num_states, num_states)) {}

  int num_scores() const { return static_cast<int>(slices_.size()); }
  int num_states() const { return slices_.empty() ? 0 : static_cast<int>(slices_[0].rows()); }

  Scalar operator()(int h, int l, int m) const { return slices_[h](l, m); }
  Scalar& operator()(int h, int l, int m) { return slices_[h](l, m); }

  const Slice& slice(int h) const { return slices_[h]; }
  Slice& slice(int h) { return slices_[h]; }

  template <typename F>
  ScoreTensor unaryExpr(F f) const {
    ScoreTensor out = *this;
    for (auto& s : out.slices_) s = s.unaryExpr(f);
    return out;
  }

 private:
  std::vector<Slice> slices_;
};

using ScoreTensorXd = ScoreTensor<double>;

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  bool log_spaced = false;  // seeding grids split this box evenly in log space

  static Box scalar(double lo, double hi);
  Eigen::Index size() const { return lower.size(); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

/// Parameter (theta, score kernel) and hyperparameter (gamma, prior).
struct Params {
  Eigen::VectorXd theta;
  Eigen::VectorXd gamma;

  static Params scalar(double theta, double gamma);
};

/// Joint box over (theta, gamma), flattened as [theta; gamma] for optimizers.
struct ParamBox {
  Box theta;
  Box gamma;

  Eigen::Index size() const { return theta.size() + gamma.size(); }
  bool contains(const Params& p) const;
  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
  std::vector<bool> log_axes() const;
  Eigen::VectorXd flatten(const Params& p) const;
  Params unflatten(const Eigen::VectorXd& z) const;
  Eigen::VectorXd project(const Eigen::VectorXd& z) const;
};

/// A parametric score/state family as a record of kernels. Everything after
/// prior_kernel is optional: missing log kernels are logs of the linear ones
/// and missing jacobians come from finite differences of the kernels.
struct ModelFamily {
  std::string name;
  AlphabetSpec alphabet;
  ParamBox domain;  // feasibility
  ParamBox search;  // box handed to the estimators, a sub-box of domain

  std::function<ScoreTensorXd(const Eigen::VectorXd& theta)> score_kernel;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& gamma)> prior_kernel;
  std::function<ScoreTensorXd(const Eigen::VectorXd& theta)> log_score_kernel;
  // d log p_{h|l,m} / d theta_k, one tensor per component of theta
  std::function<std::vector<ScoreTensorXd>(const Eigen::VectorXd& theta)> log_score_jacobian;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& gamma)> prior_jacobian;

  int num_states() const { return alphabet.num_states; }
  int num_scores() const { return alphabet.num_scores; }

  /// Throws Error{InfeasibleParams}.
  void check_feasible(const Params& p) const;
};

ScoreTensorXd score_tensor(const ModelFamily& family, const Eigen::VectorXd& theta);
Eigen::VectorXd prior_vector(const ModelFamily& family, const Eigen::VectorXd& gamma);

/// Elementwise logs; exact zeros map to -inf.
ScoreTensorXd log_score_tensor(const ModelFamily& family, const Eigen::VectorXd& theta);
Eigen::VectorXd log_prior_vector(const ModelFamily& family, const Eigen::VectorXd& gamma);

/// d log p_{h|l,m} / d theta_k, one tensor per component of theta. Entries
/// where the probability is exactly zero are reported as 0.
std::vector<ScoreTensorXd> log_score_tensor_jacobian(const ModelFamily& family,
                                                     const Eigen::VectorXd& theta);
/// d p_l / d gamma_k as a C x dim(gamma) matrix.
Eigen::MatrixXd prior_jacobian(const ModelFamily& family, const Eigen::VectorXd& gamma);

// ---------------------------------------------------------------------------
// Social ranking family: Mallows-type score kernel and binomial prior.

using SemiDistance = std::function<double(int l, int m)>;  // 0-based states

/// d(c_l, c_m) = |l - m|.
SemiDistance absdiff_distance();

/// Unnormalized log-weights are -(((R - h)/R - d(l,m)/C) / theta)^2 with
/// 1-based h, normalized over h with a max shift so tiny theta stays finite.
template <typename Scalar>
ScoreTensor<Scalar> mallows_log_score_tensor(const Scalar& theta, const Eigen::MatrixXd& distance,
                                             int num_scores) {
  const auto C = static_cast<int>(distance.rows());
  const int R = num_scores;
  using std::log;
  ScoreTensor<Scalar> out(R, C);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e(R);
  for (int l = 0; l < C; ++l) {
    for (int m = 0; m < C; ++m) {
      for (int h = 0; h < R; ++h) {
        const double a = static_cast<double>(R - (h + 1)) / R - distance(l, m) / C;
        const Scalar z = Scalar(a) / theta;
        e[h] = -z * z;
      }
      const Scalar top = e.maxCoeff();
      e.array() -= top;
      const Scalar log_sum = log(e.array().exp().sum());
      for (int h = 0; h < R; ++h) out(h, l, m) = e[h] - log_sum;
    }
  }
  return out;
}

template <typename Scalar>
ScoreTensor<Scalar> mallows_score_tensor(const Scalar& theta, const Eigen::MatrixXd& distance,
                                         int num_scores) {
  return mallows_log_score_tensor(theta, distance, num_scores).unaryExpr([](const Scalar& x) {
    using std::exp;
    return exp(x);
  });
}

/// Binomial(C-1, gamma) over states 0..C-1.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> binomial_prior(const Scalar& gamma, int num_states) {
  using std::pow;
  const int n = num_states - 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p(num_states);
  double coeff = 1.0;
  for (int k = 0; k <= n; ++k) {
    p[k] = Scalar(coeff) * pow(gamma, Scalar(k)) * pow(Scalar(1) - gamma, Scalar(n - k));
    coeff = coeff * (n - k) / (k + 1);
  }
  return p;
}

/// theta in [1e-3, 10], gamma in [0, 1]. When the distance is invariant under
/// the label reversal l -> C-1-l the likelihood satisfies
/// L(theta, gamma) = L(theta, 1 - gamma), so the search box is cut to
/// gamma <= 1/2.
ModelFamily social_ranking_family(int num_states, int num_scores,
                                  SemiDistance distance = absdiff_distance());

}  // namespace scoregraph
