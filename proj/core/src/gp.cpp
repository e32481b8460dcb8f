#include "vsr/gp.hpp"

#include <algorithm>
#include <limits>

namespace vsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ExprNode*> collect_editable(ExprNode& tree) {
  std::vector<ExprNode*> out;
  const std::function<void(ExprNode&)> walk = [&](ExprNode& n) {
    if (n.editable)
      out.push_back(&n);
    for (auto& c : n.children)
      walk(c);
  };
  walk(tree);
  return out;
}

// Roots of subtrees whose every node is editable; the only legal swap sites.
std::vector<ExprNode*> collect_swappable(ExprNode& tree) {
  std::vector<ExprNode*> out;
  const std::function<bool(ExprNode&)> walk = [&](ExprNode& n) {
    bool all = n.editable;
    for (auto& c : n.children)
      all = walk(c) && all;
    if (all)
      out.push_back(&n);
    return all;
  };
  walk(tree);
  return out;
}

ExprNode random_leaf(const TokenSet& tokens, Rng& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int var_choices = static_cast<int>(tokens.variables.size());
  const int choices = var_choices + (tokens.allow_const ? 1 : 0);
  if (choices == 0)
    return ExprNode::constant(unit(rng)); // empty leaf vocabulary; degrade
  std::uniform_int_distribution<int> pick(0, choices - 1);
  const int c = pick(rng);
  if (c < var_choices)
    return ExprNode::variable(tokens.variables[c]);
  return ExprNode::constant(unit(rng));
}

void sort_pool(Population& pool) {
  std::vector<int> counts(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    counts[i] = node_count(pool[i].tree);
  std::vector<int> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (pool[a].fitness != pool[b].fitness)
      return pool[a].fitness < pool[b].fitness;
    return counts[a] < counts[b];
  });
  Population sorted;
  sorted.reserve(pool.size());
  for (int i : order)
    sorted.push_back(std::move(pool[i]));
  pool = std::move(sorted);
}

} // namespace

ExprNode random_tree(const TokenSet& tokens, int max_depth, double leaf_prob,
                     Rng& rng) {
  if (max_depth < 1)
    throw ConfigError("random_tree: max_depth must be positive");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::function<ExprNode(int)> grow = [&](int depth) -> ExprNode {
    if (depth >= max_depth || !tokens.has_ops() || coin(rng) < leaf_prob)
      return random_leaf(tokens, rng);
    const int nb = static_cast<int>(tokens.binary_ops.size());
    const int nu = static_cast<int>(tokens.unary_ops.size());
    std::uniform_int_distribution<int> pick(0, nb + nu - 1);
    const int c = pick(rng);
    if (c < nb)
      return ExprNode::binary(tokens.binary_ops[c], grow(depth + 1),
                              grow(depth + 1));
    return ExprNode::unary(tokens.unary_ops[c - nb], grow(depth + 1));
  };
  return grow(1);
}

void mutate(ExprNode& tree, const TokenSet& tokens, int max_nodes, Rng& rng) {
  std::vector<ExprNode*> sites = collect_editable(tree);
  if (sites.empty())
    return;
  std::uniform_int_distribution<std::size_t> pick(0, sites.size() - 1);
  ExprNode& site = *sites[pick(rng)];

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int total = node_count(tree);
  if (fully_editable(site) && coin(rng) < 0.5) {
    ExprNode replacement = random_tree(tokens, 2, 0.4, rng);
    if (total - node_count(site) + node_count(replacement) <= max_nodes) {
      site = std::move(replacement);
      return;
    }
    // too big; fall through to a point change
  }

  if (site.children.empty()) {
    site = random_leaf(tokens, rng);
    return;
  }
  const auto& ops =
      arity(site.op) == 2 ? tokens.binary_ops : tokens.unary_ops;
  if (ops.empty())
    return;
  std::uniform_int_distribution<std::size_t> pick_op(0, ops.size() - 1);
  site.op = ops[pick_op(rng)];
}

bool crossover(ExprNode& a, ExprNode& b, int max_nodes, Rng& rng) {
  std::vector<ExprNode*> sa = collect_swappable(a);
  std::vector<ExprNode*> sb = collect_swappable(b);
  if (sa.empty() || sb.empty())
    return false;
  std::uniform_int_distribution<std::size_t> pick_a(0, sa.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_b(0, sb.size() - 1);
  const int na = node_count(a);
  const int nb = node_count(b);
  for (int attempt = 0; attempt < 5; ++attempt) {
    ExprNode* pa = sa[pick_a(rng)];
    ExprNode* pb = sb[pick_b(rng)];
    const int ca = node_count(*pa);
    const int cb = node_count(*pb);
    if (na - ca + cb <= max_nodes && nb - cb + ca <= max_nodes) {
      std::swap(*pa, *pb);
      return true;
    }
  }
  return false;
}

Population select(Population pool, double keep_fraction, int random_survivors,
                  Rng& rng) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0))
    throw ConfigError("select: keep_fraction must lie in [0, 1]");
  if (random_survivors < 0)
    throw ConfigError("select: negative survivor count");
  if (pool.empty())
    return pool;
  sort_pool(pool);
  const std::size_t keep = std::min(
      pool.size(),
      std::max<std::size_t>(
          1, static_cast<std::size_t>(
                 std::llround(keep_fraction * static_cast<double>(pool.size())))));

  Population out(pool.begin(), pool.begin() + keep);
  std::vector<std::size_t> rest(pool.size() - keep);
  std::iota(rest.begin(), rest.end(), keep);
  std::vector<std::size_t> lucky;
  std::sample(rest.begin(), rest.end(), std::back_inserter(lucky),
              static_cast<std::size_t>(random_survivors), rng);
  for (std::size_t i : lucky)
    out.push_back(std::move(pool[i]));
  return out;
}

Population run_gp(Population init, Oracle& oracle, const ControlSpec& control,
                  const TokenSet& tokens, const GpConfig& config,
                  GpRunInfo* info) {
  if (config.pool_size < 1)
    throw ConfigError("run_gp: pool_size must be positive");
  if (config.generations < 0)
    throw ConfigError("run_gp: negative generation count");

  Rng rng(config.seed);
  GpRunInfo local;
  GpRunInfo& stats = info ? *info : local;
  stats = {};
  stats.best_fitness = kInf;

  Population pool = std::move(init);
  if (pool.empty())
    for (int i = 0; i < config.pool_size; ++i)
      pool.push_back(
          {random_tree(tokens, config.init_depth, config.init_leaf_prob, rng),
           kInf});

  const auto refit = [&](GpMember& m) {
    Oracle::Trial trial = oracle.sample_trial(control, config.batch_size);
    FitResult r =
        fit_constants(m.tree, trial.inputs, trial.outputs, config.fit, rng);
    m.fitness = r.fitness;
    ++stats.fits;
  };

  if (config.generations == 0) {
    for (auto& m : pool)
      refit(m);
    sort_pool(pool);
    stats.best_fitness = pool.front().fitness;
    return pool;
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int gen = 0; gen < config.generations; ++gen) {
    stats.generations_run = gen + 1;

    for (auto& m : pool)
      refit(m);
    sort_pool(pool);
    stats.best_fitness = std::min(stats.best_fitness, pool.front().fitness);
    if (config.early_stop_fitness >= 0.0 &&
        pool.front().fitness <= config.early_stop_fitness)
      return pool;
    if (config.max_fits != 0 && stats.fits >= config.max_fits)
      return pool; // budget spent; ranking above is current

    pool = select(std::move(pool), config.keep_fraction,
                  config.random_survivors, rng);

    // index 0 is the incumbent; variation never touches it in place
    for (std::size_t i = 1; i < pool.size(); ++i)
      if (coin(rng) < config.p_mutate)
        mutate(pool[i].tree, tokens, config.max_nodes, rng);

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t pairs = order.size() / 2;
    for (std::size_t p = 0; p < pairs; ++p) {
      if (coin(rng) >= config.p_crossover)
        continue;
      GpMember child_a{pool[order[2 * p]].tree, kInf};
      GpMember child_b{pool[order[2 * p + 1]].tree, kInf};
      if (crossover(child_a.tree, child_b.tree, config.max_nodes, rng)) {
        pool.push_back(std::move(child_a));
        pool.push_back(std::move(child_b));
      }
    }

    for (auto& m : pool)
      refit(m);
    sort_pool(pool);
    if (static_cast<int>(pool.size()) > config.pool_size)
      pool.resize(config.pool_size);
    stats.best_fitness = std::min(stats.best_fitness, pool.front().fitness);
  }
  return pool;
}

} // namespace vsr
