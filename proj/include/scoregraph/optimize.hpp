#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace scoregraph {

/// Smooth objective to be maximized over a box.
struct BoxObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)> value_and_gradient;
};

struct AscentOptions {
  double tol = 1e-6;     // on || P(z + grad) - z ||
  int max_iters = 500;
  double armijo = 1e-4;
};

struct AscentStep {
  int iteration;
  double value;
  Eigen::VectorXd z;
};

struct AscentResult {
  Eigen::VectorXd z;
  double value = 0.0;
  double stationarity = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<AscentStep> trace;  // accepted iterates, nondecreasing in value
};

/// Projected gradient ascent with Barzilai-Borwein trial steps and Armijo
/// backtracking along the projection arc.
AscentResult projected_gradient_ascent(const BoxObjective& objective, const Eigen::VectorXd& lower,
                                       const Eigen::VectorXd& upper, const Eigen::VectorXd& start,
                                       const AscentOptions& options);

/// Cell centers of a tensor grid with points_per_dim[k] cells along axis k,
/// enumerated with the first axis outermost. Axes flagged in log_axes are
/// split evenly in log space (their lower bound must be positive).
std::vector<Eigen::VectorXd> grid_cell_centers(const Eigen::VectorXd& lower,
                                               const Eigen::VectorXd& upper,
                                               const std::vector<int>& points_per_dim,
                                               const std::vector<bool>& log_axes = {});

/// Central differences (one-sided at the box faces).
Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& z, const Eigen::VectorXd& lower,
                                           const Eigen::VectorXd& upper, double step = 1e-6);

}  // namespace scoregraph
