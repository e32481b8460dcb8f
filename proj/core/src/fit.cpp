#include "vsr/fit.hpp"

#include <cmath>
#include <limits>

#include "vsr/metrics.hpp"
#include "vsr/minimize.hpp"

namespace vsr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FitResult fit_constants(ExprNode& tree, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets,
                        const FitOptions& options, Rng& rng) {
  if (inputs.rows() != targets.size())
    throw ConfigError("fit_constants: inputs and targets disagree on size");
  if (options.max_iter < 1)
    throw ConfigError("fit_constants: max_iter must be positive");
  if (options.max_restarts < 0)
    throw ConfigError("fit_constants: negative restart count");

  std::vector<ExprNode*> slots = collect_open_constants(tree);
  const int L = static_cast<int>(slots.size());

  FitResult result;
  if (L == 0) {
    const Eigen::VectorXd pred = evaluate(tree, inputs);
    result.fitness = mean_squared_error(targets, pred);
    result.converged = std::isfinite(result.fitness);
    return result;
  }

  const Objective objective = [&](const Eigen::VectorXd& c) {
    for (int i = 0; i < L; ++i)
      slots[i]->value = c[i];
    const Eigen::VectorXd pred = evaluate(tree, inputs);
    return mean_squared_error(targets, pred);
  };

  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  bool have_current = true;
  Eigen::VectorXd current(L);
  for (int i = 0; i < L; ++i) {
    if (slots[i]->value && std::isfinite(*slots[i]->value)) {
      current[i] = *slots[i]->value;
    } else {
      have_current = false;
      break;
    }
  }

  result.fitness = kInf;
  result.constants.assign(L, 0.0);
  Eigen::VectorXd best = Eigen::VectorXd::Zero(L);
  bool have_best = false;

  const int starts = 1 + options.max_restarts;
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd x0(L);
    if (s == 0 && have_current) {
      x0 = current;
    } else {
      for (int i = 0; i < L; ++i)
        x0[i] = unit(rng);
    }

    MinimizeResult run = options.optimizer == OptimizerKind::Bfgs
                             ? minimize_bfgs(objective, x0, options.max_iter)
                             : minimize_nelder_mead(objective, x0,
                                                    options.max_iter);
    // BFGS dies on plateaus and non-smooth regions; give the simplex a shot
    // from the same start before burning a restart.
    if (options.optimizer == OptimizerKind::Bfgs &&
        (!std::isfinite(run.value) || !run.converged)) {
      MinimizeResult fallback =
          minimize_nelder_mead(objective, x0, options.max_iter);
      fallback.iterations += run.iterations;
      if (fallback.value < run.value || !std::isfinite(run.value))
        run = fallback;
    }

    result.iterations += run.iterations;
    if (std::isfinite(run.value) && run.value < result.fitness) {
      result.fitness = run.value;
      best = run.x;
      have_best = true;
      result.converged = true;
    }
    if (result.fitness <= options.target_fitness)
      break;
  }

  if (have_best) {
    for (int i = 0; i < L; ++i) {
      slots[i]->value = best[i];
      result.constants[i] = best[i];
    }
  } else {
    // leave something evaluable in the slots, but report the failure
    for (int i = 0; i < L; ++i) {
      if (!slots[i]->value)
        slots[i]->value = 0.0;
      result.constants[i] = *slots[i]->value;
    }
    result.fitness = kInf;
    result.converged = false;
  }
  return result;
}

ExperimentOutcome cv_experiment(const ExprNode& candidate,
                                const ControlSpec& control, Oracle& oracle,
                                int trials, int batch_size,
                                const FitOptions& options, Rng& rng) {
  if (trials < 1)
    throw ConfigError("cv_experiment: need at least one trial");

  const int L = count_open_constants(candidate);
  ExperimentOutcome outcome;
  outcome.scores.reserve(trials);
  outcome.constants.resize(trials, L);
  outcome.fitted.reserve(trials);
  outcome.converged.reserve(trials);

  for (int k = 0; k < trials; ++k) {
    Oracle::Trial trial = oracle.sample_trial(control, batch_size);
    ExprNode copy = candidate;
    FitResult fit =
        fit_constants(copy, trial.inputs, trial.outputs, options, rng);
    outcome.scores.push_back(fit.fitness);
    for (int l = 0; l < L; ++l)
      outcome.constants(k, l) = fit.constants[l];
    outcome.fitted.push_back(std::move(copy));
    outcome.converged.push_back(fit.converged);
  }
  return outcome;
}

} // namespace vsr
