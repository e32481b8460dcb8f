#pragma once

#include <functional>

#include <Eigen/Core>

#include "vsr/errors.hpp"

namespace vsr {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Central finite differences, step 1e-6 * max(1, |x_i|) per coordinate.
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x);

/// Quasi-Newton minimization with a numerically estimated gradient and an
/// Armijo backtracking line search. Objectives may return +Inf anywhere;
/// the search backs off instead of trapping.
MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0,
                             int max_iter);

/// Derivative-free simplex fallback for objectives too rough for BFGS.
MinimizeResult minimize_nelder_mead(const Objective& f, Eigen::VectorXd x0,
                                    int max_iter);

} // namespace vsr
