#pragma once

#include <span>

#include <Eigen/Core>

#include "vsr/errors.hpp"

namespace vsr {

/// Goodness-of-fit summary for one prediction vector.
/// When the predictions contain Inf/NaN the report carries worst-possible
/// sentinels (+Inf errors, -Inf r2, zero inverted scores) and valid == false.
struct MetricReport {
  double mse = 0.0;
  double nmse = 0.0;
  double rmse = 0.0;
  double nrmse = 0.0;
  double inv_nmse = 0.0;
  double inv_nrmse = 0.0;
  double r2 = 0.0;
  bool valid = true;
};

/// Plain mean squared error; +Inf when either vector contains a non-finite
/// value, so rankings can treat broken candidates as worst without branching.
double mean_squared_error(const Eigen::VectorXd& y_true,
                          const Eigen::VectorXd& y_pred);

/// Population variance of a sample (divides by n, not n-1).
double population_variance(const Eigen::VectorXd& y);

MetricReport invalid_metrics();

/// Full report. Requires at least two samples (ConfigError otherwise);
/// throws DegenerateVarianceError when the target has zero variance, because
/// every normalized metric would be undefined.
MetricReport compute_metrics(const Eigen::VectorXd& y_true,
                             const Eigen::VectorXd& y_pred);

/// Fraction of reports with r2 >= tau. tau must lie in (0, 1]; the span must
/// not be empty.
double accuracy_at(std::span<const MetricReport> reports, double tau = 0.999);

} // namespace vsr
