#include "vsr/vertical.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace vsr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FreezeDecision freeze_equation(ExprNode& tree, const ExperimentOutcome& outcome,
                               const VsrConfig& config) {
  FreezeDecision decision;
  if (outcome.trials() < 1)
    throw ConfigError("freeze_equation: empty experiment");

  for (double s : outcome.scores)
    if (!(s <= config.zero_threshold)) // NaN fails too
      return decision;                 // not frozen, tree untouched

  std::vector<ExprNode*> slots = collect_open_constants(tree);
  if (outcome.constants.cols() != static_cast<Eigen::Index>(slots.size()))
    throw ConfigError("freeze_equation: experiment does not match the tree");

  decision.structure_frozen = true;
  const int K = outcome.trials();
  for (std::size_t l = 0; l < slots.size(); ++l) {
    const Eigen::VectorXd col = outcome.constants.col(l);
    const double mean = col.mean();
    const double variance =
        (col.array() - mean).square().sum() / static_cast<double>(K);
    if (variance <= config.variance_threshold) {
      slots[l]->const_kind = ConstKind::StandAlone;
      slots[l]->value = mean;
      slots[l]->editable = false;
      decision.classifications.push_back(ConstKind::StandAlone);
    } else {
      slots[l]->const_kind = ConstKind::Summary;
      // keep the best trial's value so the tree stays evaluable
      Eigen::Index best_k = 0;
      for (Eigen::Index k = 1; k < outcome.constants.rows(); ++k)
        if (outcome.scores[k] < outcome.scores[best_k])
          best_k = k;
      slots[l]->value = outcome.constants(best_k, l);
      decision.classifications.push_back(ConstKind::Summary);
    }
  }

  // freeze the structure: operators and variables become immutable
  const std::function<void(ExprNode&)> freeze = [&](ExprNode& n) {
    if (n.op != Op::Const)
      n.editable = false;
    for (auto& c : n.children)
      freeze(c);
  };
  freeze(tree);
  return decision;
}

namespace {

void best_set_insert(std::vector<BestSetEntry>& set, BestSetEntry entry,
                     int capacity) {
  for (auto& existing : set) {
    if (existing.key == entry.key) {
      if (entry.fitness < existing.fitness)
        existing = std::move(entry);
      std::sort(set.begin(), set.end(),
                [](const BestSetEntry& a, const BestSetEntry& b) {
                  return a.fitness < b.fitness;
                });
      return;
    }
  }
  set.push_back(std::move(entry));
  std::sort(set.begin(), set.end(),
            [](const BestSetEntry& a, const BestSetEntry& b) {
              return a.fitness < b.fitness;
            });
  if (static_cast<int>(set.size()) > capacity)
    set.resize(capacity);
}

} // namespace

VsrResult run_vertical(Oracle& oracle, const TokenSet& operators,
                       const VsrConfig& config) {
  if (config.trials < 1)
    throw ConfigError("run_vertical: need at least one trial");
  if (config.best_set_capacity < 1)
    throw ConfigError("run_vertical: best set capacity must be positive");

  const int m = oracle.num_vars();
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t rows0 = oracle.query_rows();

  VsrResult result;
  result.best = ExprNode::constant(0.0);
  result.best_fitness = kInf;

  const ControlSpec unrestricted = ControlSpec::all_free(m);
  Rng rng(derive_seed(config.seed, fnv1a("vertical")));

  Population pool;                      // carried across rounds (GP)
  std::optional<ExprNode> carried_best; // carried across rounds (MCTS)

  for (int round = 0; round < m; ++round) {
    result.stats.rounds = round + 1;

    std::vector<int> held;
    for (int v = round + 1; v < m; ++v)
      held.push_back(v);
    const ControlSpec control = ControlSpec::controlling(m, held);

    TokenSet round_tokens = operators;
    round_tokens.variables = {round};
    round_tokens.allow_const = true;

    // the regressors keep their own fit budgets; config.fit only governs the
    // control-variable experiments and the best-set refits below
    std::vector<ExprNode> candidates;
    if (config.regressor == RegressorKind::Gp) {
      GpConfig gp = config.gp;
      gp.batch_size = config.batch_size;
      gp.seed = derive_seed(config.seed, 1000 + round);
      GpRunInfo info;
      pool = run_gp(std::move(pool), oracle, control, round_tokens, gp, &info);
      result.stats.fits += info.fits;
      candidates.reserve(pool.size());
      for (auto& member : pool)
        candidates.push_back(std::move(member.tree));
    } else {
      MctsConfig mc = config.mcts;
      mc.batch_size = config.batch_size;
      mc.seed = derive_seed(config.seed, 2000 + round);
      // the previous round's best seeds the grammar whether or not it froze:
      // its open constants reopen as nonterminals either way
      MctsResult mr =
          run_mcts(carried_best, oracle, control, round_tokens, mc);
      result.stats.fits += mr.fits;
      if (mr.found)
        candidates.push_back(std::move(mr.best));
    }

    double round_best_fitness = kInf;
    std::size_t round_best = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      ExprNode& candidate = candidates[c];
      ExperimentOutcome outcome =
          cv_experiment(candidate, control, oracle, config.trials,
                        config.batch_size, config.fit, rng);
      result.stats.fits += static_cast<std::uint64_t>(config.trials);
      freeze_equation(candidate, outcome, config);

      // refit open slots on unrestricted data and track globally
      BestSetEntry entry;
      entry.tree = candidate;
      Oracle::Trial global =
          oracle.sample_trial(unrestricted, config.batch_size);
      FitResult global_fit = fit_constants(entry.tree, global.inputs,
                                           global.outputs, config.fit, rng);
      ++result.stats.fits;
      entry.fitness = global_fit.fitness;
      entry.key = preorder_string(entry.tree);
      best_set_insert(result.best_set, std::move(entry),
                      config.best_set_capacity);

      const double local =
          *std::min_element(outcome.scores.begin(), outcome.scores.end());
      if (local < round_best_fitness) {
        round_best_fitness = local;
        round_best = c;
      }
    }

    if (config.regressor == RegressorKind::Gp) {
      pool.clear();
      for (auto& candidate : candidates)
        pool.push_back({std::move(candidate), kInf});
    } else if (!candidates.empty()) {
      carried_best = std::move(candidates[round_best]);
    }
  }

  if (!result.best_set.empty()) {
    result.best = result.best_set.front().tree;
    result.best_fitness = result.best_set.front().fitness;
  }
  result.stats.oracle_rows = oracle.query_rows() - rows0;
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

} // namespace vsr
