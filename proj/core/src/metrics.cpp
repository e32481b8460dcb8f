#include "vsr/metrics.hpp"

#include <cmath>
#include <limits>

namespace vsr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double mean_squared_error(const Eigen::VectorXd& y_true,
                          const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size())
    throw ConfigError("mean_squared_error: size mismatch");
  if (y_true.size() == 0)
    throw ConfigError("mean_squared_error: empty input");
  if (!y_true.allFinite() || !y_pred.allFinite())
    return kInf;
  return (y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size());
}

double population_variance(const Eigen::VectorXd& y) {
  if (y.size() == 0)
    throw ConfigError("population_variance: empty input");
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size());
}

MetricReport invalid_metrics() {
  MetricReport r;
  r.mse = r.nmse = r.rmse = r.nrmse = kInf;
  r.r2 = -kInf;
  r.inv_nmse = r.inv_nrmse = 0.0;
  r.valid = false;
  return r;
}

MetricReport compute_metrics(const Eigen::VectorXd& y_true,
                             const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size())
    throw ConfigError("compute_metrics: size mismatch");
  if (y_true.size() < 2)
    throw ConfigError("compute_metrics: need at least two samples");
  if (!y_true.allFinite() || !y_pred.allFinite())
    return invalid_metrics();

  const double var = population_variance(y_true);
  if (var == 0.0)
    throw DegenerateVarianceError(
        "compute_metrics: target variance is zero, normalized metrics are undefined");

  MetricReport r;
  r.mse = mean_squared_error(y_true, y_pred);
  r.nmse = r.mse / var;
  r.rmse = std::sqrt(r.mse);
  r.nrmse = r.rmse / std::sqrt(var);
  r.inv_nmse = 1.0 / (1.0 + r.nmse);
  r.inv_nrmse = 1.0 / (1.0 + r.nrmse);
  r.r2 = 1.0 - r.nmse;
  r.valid = true;
  return r;
}

double accuracy_at(std::span<const MetricReport> reports, double tau) {
  if (reports.empty())
    throw ConfigError("accuracy_at: no reports");
  if (!(tau > 0.0 && tau <= 1.0))
    throw ConfigError("accuracy_at: tau must lie in (0, 1]");
  std::size_t hits = 0;
  for (const auto& r : reports)
    if (r.valid && r.r2 >= tau)
      ++hits;
  return static_cast<double>(hits) / static_cast<double>(reports.size());
}

} // namespace vsr
