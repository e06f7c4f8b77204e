#include "scoregraph/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace scoregraph {

namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& z, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

AscentResult projected_gradient_ascent(const BoxObjective& objective, const Eigen::VectorXd& lower,
                                       const Eigen::VectorXd& upper, const Eigen::VectorXd& start,
                                       const AscentOptions& options) {
  AscentResult r;
  r.z = clamp(start, lower, upper);
  auto [f, g] = objective.value_and_gradient(r.z);
  r.value = f;
  r.trace.push_back({0, f, r.z});

  double step = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
  for (int it = 1; it <= options.max_iters; ++it) {
    r.stationarity = (clamp(r.z + g, lower, upper) - r.z).norm();
    if (r.stationarity <= options.tol) {
      r.converged = true;
      break;
    }

    Eigen::VectorXd z_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int backtrack = 0; backtrack < 80; ++backtrack) {
      z_new = clamp(r.z + step * g, lower, upper);
      const Eigen::VectorXd d = z_new - r.z;
      if (d.squaredNorm() == 0.0) break;
      f_new = objective.value(z_new);
      if (std::isfinite(f_new) && f_new >= f + options.armijo * g.dot(d)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable ascent left at this precision

    auto [f_next, g_next] = objective.value_and_gradient(z_new);
    const Eigen::VectorXd s = z_new - r.z;
    const Eigen::VectorXd y = g - g_next;  // gradient change of -f
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : std::min(step * 4.0, 1e12);

    r.z = std::move(z_new);
    f = f_next;
    g = std::move(g_next);
    r.value = f;
    r.iterations = it;
    r.trace.push_back({it, f, r.z});
  }
  if (!r.converged) {
    r.stationarity = (clamp(r.z + g, lower, upper) - r.z).norm();
    r.converged = r.stationarity <= options.tol;
  }
  return r;
}

std::vector<Eigen::VectorXd> grid_cell_centers(const Eigen::VectorXd& lower,
                                               const Eigen::VectorXd& upper,
                                               const std::vector<int>& points_per_dim,
                                               const std::vector<bool>& log_axes) {
  const auto dims = static_cast<int>(points_per_dim.size());
  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(dims, 0);
  while (true) {
    Eigen::VectorXd z(dims);
    for (int k = 0; k < dims; ++k) {
      const double frac = (idx[k] + 0.5) / points_per_dim[k];
      if (k < static_cast<int>(log_axes.size()) && log_axes[k]) {
        z[k] = lower[k] * std::pow(upper[k] / lower[k], frac);
      } else {
        z[k] = lower[k] + frac * (upper[k] - lower[k]);
      }
    }
    out.push_back(std::move(z));
    int k = dims - 1;
    while (k >= 0 && ++idx[k] == points_per_dim[k]) idx[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& z, const Eigen::VectorXd& lower,
                                           const Eigen::VectorXd& upper, double step) {
  Eigen::VectorXd grad(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double h = step * std::max(1.0, std::abs(z[k]));
    Eigen::VectorXd hi = z, lo = z;
    hi[k] = std::min(z[k] + h, upper[k]);
    lo[k] = std::max(z[k] - h, lower[k]);
    grad[k] = (f(hi) - f(lo)) / (hi[k] - lo[k]);
  }
  return grad;
}

}  // namespace scoregraph
