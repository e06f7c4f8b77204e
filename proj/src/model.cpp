#include "scoregraph/model.hpp"

#include <algorithm>
#include <sstream>

#include "scoregraph/errors.hpp"

namespace scoregraph {

namespace {

std::string describe(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

// Central differences inside the box, one-sided at a bound.
template <typename Value, typename Eval>
std::vector<Value> kernel_fd(const Box& box, const Eigen::VectorXd& x, Eval eval) {
  std::vector<Value> out;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double step = 1e-6 * std::max(1.0, std::abs(x[k]));
    Eigen::VectorXd hi = x, lo = x;
    hi[k] = std::min(x[k] + step, box.upper[k]);
    lo[k] = std::max(x[k] - step, box.lower[k]);
    const double width = hi[k] - lo[k];
    out.push_back(eval(hi, lo, width));
  }
  return out;
}

}  // namespace

Box Box::scalar(double lo, double hi) {
  Box b;
  b.lower = Eigen::VectorXd::Constant(1, lo);
  b.upper = Eigen::VectorXd::Constant(1, hi);
  return b;
}

bool Box::contains(const Eigen::VectorXd& x) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;  // also rejects NaN
  }
  return true;
}

Params Params::scalar(double theta, double gamma) {
  return Params{Eigen::VectorXd::Constant(1, theta), Eigen::VectorXd::Constant(1, gamma)};
}

bool ParamBox::contains(const Params& p) const {
  return theta.contains(p.theta) && gamma.contains(p.gamma);
}

Eigen::VectorXd ParamBox::lower() const {
  Eigen::VectorXd z(size());
  z << theta.lower, gamma.lower;
  return z;
}

Eigen::VectorXd ParamBox::upper() const {
  Eigen::VectorXd z(size());
  z << theta.upper, gamma.upper;
  return z;
}

std::vector<bool> ParamBox::log_axes() const {
  std::vector<bool> out(static_cast<std::size_t>(theta.size()), theta.log_spaced);
  out.insert(out.end(), static_cast<std::size_t>(gamma.size()), gamma.log_spaced);
  return out;
}

Eigen::VectorXd ParamBox::flatten(const Params& p) const {
  Eigen::VectorXd z(size());
  z << p.theta, p.gamma;
  return z;
}

Params ParamBox::unflatten(const Eigen::VectorXd& z) const {
  return Params{z.head(theta.size()), z.tail(gamma.size())};
}

Eigen::VectorXd ParamBox::project(const Eigen::VectorXd& z) const {
  return z.cwiseMax(lower()).cwiseMin(upper());
}

void ModelFamily::check_feasible(const Params& p) const {
  if (!domain.theta.contains(p.theta)) {
    throw Error(ErrorCode::InfeasibleParams,
                "theta " + describe(p.theta) + " outside the " + name + " parameter domain");
  }
  if (!domain.gamma.contains(p.gamma)) {
    throw Error(ErrorCode::InfeasibleParams,
                "gamma " + describe(p.gamma) + " outside the " + name + " hyperparameter domain");
  }
}

ScoreTensorXd score_tensor(const ModelFamily& family, const Eigen::VectorXd& theta) {
  if (!family.domain.theta.contains(theta)) {
    throw Error(ErrorCode::InfeasibleParams, "theta " + describe(theta) + " infeasible");
  }
  return family.score_kernel(theta);
}

Eigen::VectorXd prior_vector(const ModelFamily& family, const Eigen::VectorXd& gamma) {
  if (!family.domain.gamma.contains(gamma)) {
    throw Error(ErrorCode::InfeasibleParams, "gamma " + describe(gamma) + " infeasible");
  }
  return family.prior_kernel(gamma);
}

ScoreTensorXd log_score_tensor(const ModelFamily& family, const Eigen::VectorXd& theta) {
  if (family.log_score_kernel) {
    if (!family.domain.theta.contains(theta)) {
      throw Error(ErrorCode::InfeasibleParams, "theta " + describe(theta) + " infeasible");
    }
    return family.log_score_kernel(theta);
  }
  return score_tensor(family, theta).unaryExpr([](double p) { return std::log(p); });
}

Eigen::VectorXd log_prior_vector(const ModelFamily& family, const Eigen::VectorXd& gamma) {
  return prior_vector(family, gamma).array().log().matrix();
}

std::vector<ScoreTensorXd> log_score_tensor_jacobian(const ModelFamily& family,
                                                     const Eigen::VectorXd& theta) {
  if (!family.domain.theta.contains(theta)) {
    throw Error(ErrorCode::InfeasibleParams, "theta " + describe(theta) + " infeasible");
  }
  if (family.log_score_jacobian) return family.log_score_jacobian(theta);
  return kernel_fd<ScoreTensorXd>(
      family.domain.theta, theta,
      [&](const Eigen::VectorXd& hi, const Eigen::VectorXd& lo, double width) {
        ScoreTensorXd a = log_score_tensor(family, hi);
        const ScoreTensorXd b = log_score_tensor(family, lo);
        for (int h = 0; h < a.num_scores(); ++h) {
          a.slice(h) = (a.slice(h) - b.slice(h)) / width;
          a.slice(h) = a.slice(h).unaryExpr([](double x) { return std::isfinite(x) ? x : 0.0; });
        }
        return a;
      });
}

Eigen::MatrixXd prior_jacobian(const ModelFamily& family, const Eigen::VectorXd& gamma) {
  if (!family.domain.gamma.contains(gamma)) {
    throw Error(ErrorCode::InfeasibleParams, "gamma " + describe(gamma) + " infeasible");
  }
  if (family.prior_jacobian) return family.prior_jacobian(gamma);
  const auto cols = kernel_fd<Eigen::VectorXd>(
      family.domain.gamma, gamma,
      [&](const Eigen::VectorXd& hi, const Eigen::VectorXd& lo, double width) {
        return Eigen::VectorXd((family.prior_kernel(hi) - family.prior_kernel(lo)) / width);
      });
  Eigen::MatrixXd jac(family.num_states(), gamma.size());
  for (Eigen::Index k = 0; k < gamma.size(); ++k) jac.col(k) = cols[k];
  return jac;
}

SemiDistance absdiff_distance() {
  return [](int l, int m) { return static_cast<double>(std::abs(l - m)); };
}

ModelFamily social_ranking_family(int num_states, int num_scores, SemiDistance distance) {
  ModelFamily f;
  f.name = "social_ranking";
  f.alphabet = AlphabetSpec::numeric(num_states, num_scores);
  f.alphabet.validate();

  const int C = num_states;
  const int R = num_scores;
  Eigen::MatrixXd d(C, C);
  bool reflection_invariant = true;
  for (int l = 0; l < C; ++l) {
    for (int m = 0; m < C; ++m) {
      d(l, m) = distance(l, m);
      if ((l == m) != (d(l, m) == 0.0) || d(l, m) < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "distance is not a semi-distance");
      }
    }
  }
  for (int l = 0; l < C; ++l) {
    for (int m = 0; m < C; ++m) {
      if (d(l, m) != d(C - 1 - l, C - 1 - m)) reflection_invariant = false;
    }
  }

  f.domain.theta = Box::scalar(1e-3, 10.0);
  f.domain.theta.log_spaced = true;
  f.domain.gamma = Box::scalar(0.0, 1.0);
  f.search = f.domain;
  if (reflection_invariant && C > 1) f.search.gamma = Box::scalar(0.0, 0.5);

  f.score_kernel = [d, R](const Eigen::VectorXd& theta) {
    return mallows_score_tensor(theta[0], d, R);
  };
  f.prior_kernel = [C](const Eigen::VectorXd& gamma) { return binomial_prior(gamma[0], C); };

  f.log_score_kernel = [d, R](const Eigen::VectorXd& theta) {
    return mallows_log_score_tensor(theta[0], d, R);
  };

  // d log p_h / d theta = s_h - sum_k p_k s_k with s_h = 2 a_h^2 / theta^3.
  f.log_score_jacobian = [d, R, C](const Eigen::VectorXd& theta) {
    const double t = theta[0];
    const ScoreTensorXd p = mallows_score_tensor(t, d, R);
    ScoreTensorXd out(R, C);
    Eigen::VectorXd s(R);
    for (int l = 0; l < C; ++l) {
      for (int m = 0; m < C; ++m) {
        double mean = 0.0;
        for (int h = 0; h < R; ++h) {
          const double a = static_cast<double>(R - (h + 1)) / R - d(l, m) / C;
          s[h] = 2.0 * a * a / (t * t * t);
          mean += p(h, l, m) * s[h];
        }
        for (int h = 0; h < R; ++h) out(h, l, m) = s[h] - mean;
      }
    }
    return std::vector<ScoreTensorXd>{out};
  };

  f.prior_jacobian = [C](const Eigen::VectorXd& gamma) {
    const double g = gamma[0];
    const int n = C - 1;
    Eigen::MatrixXd jac(C, 1);
    double coeff = 1.0;
    for (int k = 0; k <= n; ++k) {
      double v = 0.0;
      if (k > 0) v += k * std::pow(g, k - 1) * std::pow(1.0 - g, n - k);
      if (k < n) v -= (n - k) * std::pow(g, k) * std::pow(1.0 - g, n - k - 1);
      jac(k, 0) = coeff * v;
      coeff = coeff * (n - k) / (k + 1);
    }
    return jac;
  };
  return f;
}

}  // namespace scoregraph
