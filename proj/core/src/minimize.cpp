#include "vsr/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace vsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGradTol = 1e-12;
constexpr double kStepTol = 1e-14;
constexpr double kArmijoC1 = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 40;

} // namespace

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0,
                             int max_iter) {
  if (max_iter < 0)
    throw ConfigError("minimize_bfgs: negative iteration budget");
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  res.x = x0;
  res.value = f(x0);
  if (!std::isfinite(res.value))
    return res; // nowhere sensible to start from

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = x0;
  double fx = res.value;
  Eigen::VectorXd g = fd_gradient(f, x);

  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    if (!g.allFinite())
      break;
    if (g.lpNorm<Eigen::Infinity>() < kGradTol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd d = -(H * g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) { // H lost positive-definiteness, restart steepest
      H.setIdentity();
      d = -g;
      slope = g.dot(d);
    }

    double t = 1.0;
    double f_new = kInf;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = x + t * d;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= fx + kArmijoC1 * t * slope) {
        accepted = true;
        break;
      }
      t *= kBacktrack;
    }
    if (!accepted) {
      // stuck; call it converged only if the gradient is already small
      res.converged = g.lpNorm<Eigen::Infinity>() < 1e-6;
      break;
    }

    Eigen::VectorXd g_new = fd_gradient(f, x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (std::isfinite(sy) && sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }

    const double df = fx - f_new;
    x = x_new;
    fx = f_new;
    g = g_new;
    if (fx < res.value) {
      res.value = fx;
      res.x = x;
    }
    if (df < 1e-20 + 1e-12 * std::abs(fx) || s.norm() < kStepTol) {
      res.converged = true;
      break;
    }
  }
  if (fx < res.value) {
    res.value = fx;
    res.x = x;
  }
  return res;
}

MinimizeResult minimize_nelder_mead(const Objective& f, Eigen::VectorXd x0,
                                    int max_iter) {
  if (max_iter < 0)
    throw ConfigError("minimize_nelder_mead: negative iteration budget");
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  res.x = x0;
  res.value = f(x0);
  if (n == 0) {
    res.converged = std::isfinite(res.value);
    return res;
  }

  // reflection / expansion / contraction / shrink
  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  vals[0] = res.value;
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[i + 1][i] += 0.1 * std::max(1.0, std::abs(x0[i]));
    vals[i + 1] = f(pts[i + 1]);
  }

  std::vector<int> order(n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0], worst = order[n];
    if (vals[best] < res.value) {
      res.value = vals[best];
      res.x = pts[best];
    }
    const double spread = vals[worst] - vals[best];
    if (std::isfinite(vals[best]) &&
        (spread < 1e-15 * (1.0 + std::abs(vals[best])))) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= static_cast<int>(n); ++i)
      if (i != worst)
        centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + alpha * (centroid - pts[worst]);
    const double fr = f(xr);
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[order[n - 1]]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const Eigen::VectorXd xc = centroid + rho * (pts[worst] - centroid);
    const double fc = f(xc);
    if (fc < vals[worst]) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (int i = 0; i <= static_cast<int>(n); ++i) {
      if (i == best)
        continue;
      pts[i] = pts[best] + sigma * (pts[i] - pts[best]);
      vals[i] = f(pts[i]);
    }
  }

  for (int i = 0; i <= static_cast<int>(n); ++i) {
    if (vals[i] < res.value) {
      res.value = vals[i];
      res.x = pts[i];
    }
  }
  return res;
}

} // namespace vsr
