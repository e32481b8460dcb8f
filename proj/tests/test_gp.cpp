#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include <vsr/gp.hpp>

using namespace vsr;

namespace {

TokenSet basic_tokens(int num_vars) {
  std::vector<std::string> names = {"add", "sub", "mul", "const"};
  return TokenSet::from_names(names, num_vars);
}

EquationSpec sum_spec() {
  // x1 + x2 on (0.5, 5)^2
  EquationSpec spec;
  spec.num_vars = 2;
  spec.var_domains.assign(2, {0.5, 5.0});
  spec.function_set = {"add", "sub", "mul", "const"};
  spec.equation = serialize_preorder(
      ExprNode::binary(Op::Add, ExprNode::variable(0), ExprNode::variable(1)));
  return spec;
}

// c1*x1 + c2 with the operator frozen, leaves editable
ExprNode half_frozen_tree() {
  ExprNode tree = ExprNode::binary(
      Op::Add,
      ExprNode::binary(Op::Mul, ExprNode::constant(0.5),
                       ExprNode::variable(0)),
      ExprNode::constant(0.25));
  tree.editable = false;
  tree.children[0].editable = false;
  return tree;
}

std::vector<const ExprNode*> flatten(const ExprNode& tree) {
  std::vector<const ExprNode*> nodes;
  std::vector<const ExprNode*> stack{&tree};
  while (!stack.empty()) {
    const ExprNode* n = stack.back();
    stack.pop_back();
    nodes.push_back(n);
    for (const auto& c : n->children)
      stack.push_back(&c);
  }
  return nodes;
}

// collects (preorder position, op, value) of every frozen node
std::vector<std::string> frozen_signature(const ExprNode& tree) {
  std::vector<std::string> sig;
  std::function<void(const ExprNode&, std::string)> walk =
      [&](const ExprNode& n, std::string path) {
        if (!n.editable) {
          std::string entry = path + ":" + std::to_string(static_cast<int>(n.op));
          if (n.op == Op::Const && n.value)
            entry += "=" + format_double(*n.value);
          if (n.op == Op::Var)
            entry += "#" + std::to_string(n.var_index);
          sig.push_back(std::move(entry));
        }
        for (std::size_t i = 0; i < n.children.size(); ++i)
          walk(n.children[i], path + std::to_string(i));
      };
  walk(tree, "r");
  return sig;
}

} // namespace

TEST_CASE("random trees honour the token set and stay evaluable") {
  const TokenSet tokens = basic_tokens(3);
  Rng rng(5);
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(8, 3);
  for (int i = 0; i < 200; ++i) {
    const ExprNode tree = random_tree(tokens, 4, 0.4, rng);
    CHECK_NOTHROW(check_arity(tree));
    CHECK(tree_depth(tree) <= 4);
    CHECK(fully_editable(tree));
    for (const ExprNode* n : flatten(tree)) {
      if (n->op == Op::Const) {
        REQUIRE(n->value.has_value());
        CHECK(std::abs(*n->value) <= 1.0);
      } else {
        const bool known =
            n->op == Op::Var ||
            std::find(tokens.binary_ops.begin(), tokens.binary_ops.end(),
                      n->op) != tokens.binary_ops.end();
        CHECK(known);
      }
    }
    CHECK_NOTHROW(evaluate(tree, X));
  }
}

TEST_CASE("leaf probability one yields bare leaves") {
  const TokenSet tokens = basic_tokens(2);
  Rng rng(1);
  for (int i = 0; i < 50; ++i)
    CHECK(node_count(random_tree(tokens, 5, 1.0, rng)) == 1);
}

TEST_CASE("mutation changes at most one editable site") {
  const TokenSet tokens = basic_tokens(2);
  Rng rng(11);
  int changed = 0;
  for (int i = 0; i < 1000; ++i) {
    ExprNode before = half_frozen_tree();
    ExprNode after = before;
    mutate(after, tokens, 64, rng);
    CHECK_NOTHROW(check_arity(after));
    // frozen interior structure intact: root add, left child mul
    CHECK(after.op == Op::Add);
    CHECK(after.children[0].op == Op::Mul);
    if (!structurally_equal(before, after))
      ++changed;
    CHECK(node_count(after) <= 64);
  }
  // leaf or subtree replacement fires nearly always on editable sites
  CHECK(changed > 900);
}

TEST_CASE("mutation respects the node budget") {
  const TokenSet tokens = basic_tokens(2);
  Rng rng(3);
  ExprNode tree = half_frozen_tree();
  for (int i = 0; i < 500; ++i) {
    mutate(tree, tokens, 16, rng);
    CHECK(node_count(tree) <= 16);
  }
}

TEST_CASE("fully frozen trees are never altered by mutation or crossover") {
  const TokenSet tokens = basic_tokens(2);
  Rng rng(7);
  ExprNode frozen = half_frozen_tree();
  set_editable_all(frozen, false);
  const ExprNode golden = frozen;

  for (int i = 0; i < 10000; ++i) {
    mutate(frozen, tokens, 64, rng);
    REQUIRE(structurally_equal(frozen, golden));
  }
  ExprNode partner = ExprNode::binary(Op::Add, ExprNode::variable(0),
                                      ExprNode::variable(1));
  for (int i = 0; i < 1000; ++i) {
    const bool did = crossover(frozen, partner, 64, rng);
    CHECK_FALSE(did);
    REQUIRE(structurally_equal(frozen, golden));
  }
}

TEST_CASE("mutation and crossover never touch frozen nodes") {
  // property sweep: randomly freeze parts of random trees, hammer them with
  // operators, and verify every frozen node survives in place
  const TokenSet tokens = basic_tokens(3);
  Rng rng(2024);
  std::bernoulli_distribution freeze(0.4);

  for (int trial = 0; trial < 2000; ++trial) {
    ExprNode a = random_tree(tokens, 4, 0.35, rng);
    ExprNode b = random_tree(tokens, 4, 0.35, rng);
    // freeze nodes independently, matching the patchwork that repeated
    // freezing rounds can produce
    std::function<void(ExprNode&)> scramble = [&](ExprNode& n) {
      if (freeze(rng))
        n.editable = false;
      for (auto& c : n.children)
        scramble(c);
    };
    scramble(a);
    scramble(b);
    const auto sig_a = frozen_signature(a);
    const auto sig_b = frozen_signature(b);

    mutate(a, tokens, 64, rng);
    crossover(a, b, 64, rng);

    CHECK(frozen_signature(a) == sig_a);
    CHECK(frozen_signature(b) == sig_b);
    CHECK_NOTHROW(check_arity(a));
    CHECK_NOTHROW(check_arity(b));
  }
}

TEST_CASE("crossover swaps material between editable trees") {
  const TokenSet tokens = basic_tokens(2);
  Rng rng(17);
  int swapped = 0;
  for (int i = 0; i < 200; ++i) {
    ExprNode a = random_tree(tokens, 4, 0.3, rng);
    ExprNode b = random_tree(tokens, 4, 0.3, rng);
    const ExprNode before_a = a;
    if (crossover(a, b, 64, rng)) {
      ++swapped;
      CHECK(node_count(a) <= 64);
      CHECK(node_count(b) <= 64);
      CHECK_NOTHROW(check_arity(a));
      CHECK_NOTHROW(check_arity(b));
    } else {
      CHECK(structurally_equal(a, before_a));
    }
  }
  CHECK(swapped > 150);
}

TEST_CASE("selection keeps the top share plus random survivors") {
  Rng rng(4);
  Population pool;
  for (int i = 0; i < 10; ++i) {
    GpMember m;
    m.tree = ExprNode::constant(static_cast<double>(i));
    m.fitness = static_cast<double>(i); // already sorted best-first
    pool.push_back(std::move(m));
  }
  const Population kept = select(pool, 0.5, 1, rng);
  REQUIRE(kept.size() == 6);
  for (int i = 0; i < 5; ++i)
    CHECK(kept[i].fitness == doctest::Approx(i));
  CHECK(kept[5].fitness >= 5.0); // the random survivor comes from the rest

  // ties on fitness break towards smaller trees
  Population tied;
  for (int n : {5, 1, 3}) {
    GpMember m;
    m.tree = ExprNode::constant(1.0);
    for (int k = 1; k < n; ++k)
      m.tree = ExprNode::binary(Op::Add, std::move(m.tree),
                                ExprNode::constant(1.0));
    m.fitness = 0.0;
    tied.push_back(std::move(m));
  }
  const Population ranked = select(tied, 1.0, 0, rng);
  REQUIRE(ranked.size() == 3);
  CHECK(node_count(ranked[0].tree) <= node_count(ranked[1].tree));
  CHECK(node_count(ranked[1].tree) <= node_count(ranked[2].tree));
}

TEST_CASE("evolution recovers a linear reduction") {
  Oracle oracle(sum_spec(), {0.0, 515});
  const ControlSpec control = ControlSpec::controlling(2, {1});
  const TokenSet tokens = basic_tokens(2);

  GpConfig config;
  config.pool_size = 40;
  config.generations = 30;
  config.batch_size = 64;
  config.seed = 8;
  config.early_stop_fitness = 1e-12;

  GpRunInfo info;
  const Population out =
      run_gp({}, oracle, control, tokens, config, &info);
  REQUIRE_FALSE(out.empty());
  CHECK(out.size() <= 40);
  // truth reduces to x1 + c: exactly representable, so near-zero error
  CHECK(out.front().fitness < 1e-8);
  CHECK(info.fits > 0);
  CHECK(info.generations_run <= 30);
  CHECK(std::is_sorted(out.begin(), out.end(),
                       [](const GpMember& a, const GpMember& b) {
                         return a.fitness < b.fitness;
                       }));
}

TEST_CASE("zero generations only scores and ranks the seed pool") {
  Oracle oracle(sum_spec(), {0.0, 99});
  const ControlSpec control = ControlSpec::all_free(2);
  const TokenSet tokens = basic_tokens(2);

  Population seed;
  {
    GpMember exact;
    exact.tree = ExprNode::binary(Op::Add, ExprNode::variable(0),
                                  ExprNode::variable(1));
    GpMember wrong;
    wrong.tree = ExprNode::binary(Op::Mul, ExprNode::variable(0),
                                  ExprNode::variable(1));
    seed.push_back(std::move(wrong));
    seed.push_back(std::move(exact));
  }
  GpConfig config;
  config.generations = 0;
  config.pool_size = 10;
  config.batch_size = 32;
  const Population out = run_gp(seed, oracle, control, tokens, config);
  REQUIRE(out.size() == 2); // no padding of explicit seed pools
  CHECK(out[0].tree.op == Op::Add);
  CHECK(out[0].fitness < 1e-20);
  CHECK(out[1].fitness > 1.0);
}

TEST_CASE("runs are deterministic for a fixed seed") {
  const EquationSpec spec = sum_spec();
  const TokenSet tokens = basic_tokens(2);
  GpConfig config;
  config.pool_size = 12;
  config.generations = 4;
  config.batch_size = 32;
  config.seed = 21;

  auto run = [&] {
    Oracle oracle(spec, {0.0, 777});
    return run_gp({}, oracle, ControlSpec::all_free(2), tokens, config);
  };
  const Population a = run();
  const Population b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].fitness == b[i].fitness);
    CHECK(preorder_string(a[i].tree) ==
          preorder_string(b[i].tree));
  }
}

TEST_CASE("pool size and node budget hold across a long run") {
  Oracle oracle(sum_spec(), {0.0, 31});
  const TokenSet tokens = basic_tokens(2);
  GpConfig config;
  config.pool_size = 16;
  config.generations = 10;
  config.batch_size = 32;
  config.max_nodes = 24;
  config.seed = 3;
  const Population out =
      run_gp({}, oracle, ControlSpec::all_free(2), tokens, config);
  CHECK(out.size() <= 16);
  for (const GpMember& m : out)
    CHECK(node_count(m.tree) <= 24);
}
