#pragma once

#include <cstdint>
#include <vector>

#include "vsr/expr.hpp"
#include "vsr/fit.hpp"
#include "vsr/oracle.hpp"

namespace vsr {

struct GpConfig {
  int pool_size = 100;
  int generations = 200;
  double p_mutate = 0.8;
  double p_crossover = 0.8;
  double keep_fraction = 0.5; // top share kept by selection
  int random_survivors = 10;  // extra randomly kept members, for diversity
  int max_nodes = 64;         // hard cap against bloat
  int init_depth = 4;         // grow-method depth for fresh random trees
  double init_leaf_prob = 0.4;
  int batch_size = 256;
  FitOptions fit;
  double early_stop_fitness = -1.0; // stop early once reached; off if negative
  std::uint64_t max_fits = 0;       // constant-fit budget, checked at
                                    // generation boundaries; 0 = unlimited
  std::uint64_t seed = 0;
};

struct GpMember {
  ExprNode tree;
  double fitness = 0.0;
};
using Population = std::vector<GpMember>;

struct GpRunInfo {
  std::uint64_t fits = 0;
  int generations_run = 0;
  double best_fitness = 0.0;
};

/// Grow-method random tree over the token set. Constants get uniform [-1, 1]
/// initial values so every generated tree is immediately evaluable.
ExprNode random_tree(const TokenSet& tokens, int max_depth, double leaf_prob,
                     Rng& rng);

/// Mutate exactly one editable site: replace a leaf with a fresh leaf, swap
/// an operator for one of equal arity, or replace a fully-editable subtree
/// with a small random one. Frozen nodes are never selected nor altered; a
/// tree with no editable nodes is left unchanged.
void mutate(ExprNode& tree, const TokenSet& tokens, int max_nodes, Rng& rng);

/// Swap one fully-editable subtree of `a` with one of `b`. Returns false
/// (leaving both trees unchanged) when either tree offers no fully-editable
/// site or every candidate swap would exceed max_nodes.
bool crossover(ExprNode& a, ExprNode& b, int max_nodes, Rng& rng);

/// Rank by (fitness, node count, insertion order) and keep the top
/// keep_fraction share plus `random_survivors` randomly chosen others.
Population select(Population pool, double keep_fraction, int random_survivors,
                  Rng& rng);

/// Evolve `init` (or a fresh random pool when empty) against oracle data
/// drawn under `control`. Each generation: refit every member on a fresh
/// batch, select, mutate, cross over, refit, truncate to pool_size. Returns
/// the final pool, best first.
Population run_gp(Population init, Oracle& oracle, const ControlSpec& control,
                  const TokenSet& tokens, const GpConfig& config,
                  GpRunInfo* info = nullptr);

} // namespace vsr
