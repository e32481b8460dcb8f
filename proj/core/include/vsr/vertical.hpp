#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsr/expr.hpp"
#include "vsr/fit.hpp"
#include "vsr/gp.hpp"
#include "vsr/mcts.hpp"
#include "vsr/oracle.hpp"

namespace vsr {

enum class RegressorKind { Gp, Mcts };

struct VsrConfig {
  RegressorKind regressor = RegressorKind::Gp;
  int trials = 5;                  // controlled trials per freeze decision
  double zero_threshold = 1e-10;   // trial fitness at or below counts as zero
  double variance_threshold = 1e-3; // constant column variance for stand-alone
  int best_set_capacity = 50;
  int batch_size = 256;
  FitOptions fit;  // for the experiments and best-set refits; the regressors
                   // below carry their own fit budgets
  GpConfig gp;     // per-round budget
  MctsConfig mcts; // per-round budget
  std::uint64_t seed = 0;
};

struct FreezeDecision {
  bool structure_frozen = false;
  std::vector<ConstKind> classifications; // one per open slot, pre-order
};

/// The freeze test. When every trial score is at or below zero_threshold the
/// candidate fits the reduced problem exactly: operators and variables are
/// frozen, and each open constant is classified by the spread of its fitted
/// values across trials — low variance means a genuine (stand-alone)
/// constant, pinned to the mean and frozen; high variance means the slot
/// summarizes still-controlled variables and must stay editable. On failure
/// the tree is left exactly as it was.
FreezeDecision freeze_equation(ExprNode& tree, const ExperimentOutcome& outcome,
                               const VsrConfig& config);

struct BestSetEntry {
  ExprNode tree;
  double fitness = 0.0; // on unrestricted (all variables free) data
  std::string key;      // pre-order string, for deduplication
};

struct VsrStats {
  double wall_seconds = 0.0;
  std::uint64_t oracle_rows = 0;
  std::uint64_t fits = 0;
  int rounds = 0;
};

struct VsrResult {
  ExprNode best;
  double best_fitness = 0.0;
  std::vector<BestSetEntry> best_set;
  VsrStats stats;
};

/// Control-variable search: free the variables one at a time in index order.
/// Round i runs the configured regressor with leaf vocabulary {const, x_i}
/// plus the operator set, holding x_{i+1}.. constant; each candidate then
/// faces a `trials`-trial controlled experiment and the freeze test, and is
/// refit on unrestricted data for the global best set.
VsrResult run_vertical(Oracle& oracle, const TokenSet& operators,
                       const VsrConfig& config);

} // namespace vsr
