#pragma once

#include <vector>

#include <Eigen/Core>

#include "vsr/expr.hpp"
#include "vsr/oracle.hpp"
#include "vsr/rng.hpp"

namespace vsr {

enum class OptimizerKind { Bfgs, NelderMead };

struct FitOptions {
  OptimizerKind optimizer = OptimizerKind::Bfgs;
  int max_iter = 500;
  int max_restarts = 3;       // additional random starts after the first
  double target_fitness = 1e-10; // stop restarting once this is reached
};

struct FitResult {
  double fitness = 0.0; // mean squared error on the supplied data
  std::vector<double> constants;
  bool converged = false;
  int iterations = 0;
};

/// Fit the open constant slots of `tree` against (inputs, targets) by MSE.
/// The tree's slots are updated to the best values found. Frozen stand-alone
/// constants are never touched. With no open slots this is a plain
/// evaluation. The first start reuses current slot values when they exist;
/// restarts draw uniform [-1, 1]. A fit whose objective never becomes finite
/// reports converged == false and +Inf fitness.
FitResult fit_constants(ExprNode& tree, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets,
                        const FitOptions& options, Rng& rng);

/// Result of a K-trial control-variable experiment on one candidate:
/// per-trial fitness scores, the fitted constants as a (trials x slots)
/// matrix, and the fitted copies themselves.
struct ExperimentOutcome {
  std::vector<double> scores;
  Eigen::MatrixXd constants;
  std::vector<ExprNode> fitted;
  std::vector<bool> converged;

  int trials() const { return static_cast<int>(scores.size()); }
};

/// Run `trials` independent controlled trials: each draws fresh controlled
/// values and a fresh batch from the oracle, then fits a copy of `candidate`.
/// A failed fit marks its trial non-converged (score +Inf) without aborting
/// the experiment.
ExperimentOutcome cv_experiment(const ExprNode& candidate,
                                const ControlSpec& control, Oracle& oracle,
                                int trials, int batch_size,
                                const FitOptions& options, Rng& rng);

} // namespace vsr
