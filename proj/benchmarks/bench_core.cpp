#include <benchmark/benchmark.h>

#include <vsr/fit.hpp>
#include <vsr/gp.hpp>
#include <vsr/mcts.hpp>
#include <vsr/vertical.hpp>

namespace {

using namespace vsr;

EquationSpec bench_spec() {
  // 0.5*x1/x2 + x3 on (0.5, 5)^3
  EquationSpec spec;
  spec.num_vars = 3;
  spec.var_domains.assign(3, {0.5, 5.0});
  spec.function_set = {"add", "sub", "mul", "div", "const"};
  spec.equation = serialize_preorder(ExprNode::binary(
      Op::Add,
      ExprNode::binary(Op::Mul, ExprNode::constant(0.5),
                       ExprNode::binary(Op::Div, ExprNode::variable(0),
                                        ExprNode::variable(1))),
      ExprNode::variable(2)));
  return spec;
}

TokenSet bench_tokens() {
  const std::vector<std::string> names = {"add", "sub", "mul", "div", "const"};
  return TokenSet::from_names(names, 3);
}

void BM_Evaluate(benchmark::State& state) {
  const ExprNode tree =
      deserialize_preorder(bench_spec().equation);
  const Eigen::MatrixXd X =
      Eigen::MatrixXd::Random(state.range(0), 3).array().abs() + 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(tree, X));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(64)->Arg(256)->Arg(1024);

void BM_FitConstants(benchmark::State& state) {
  Oracle oracle(bench_spec(), {0.0, 1});
  const Oracle::Trial trial =
      oracle.sample_trial(ControlSpec::all_free(3), 256);
  ExprNode model = ExprNode::binary(
      Op::Add,
      ExprNode::binary(Op::Mul, ExprNode::open_constant(),
                       ExprNode::binary(Op::Div, ExprNode::variable(0),
                                        ExprNode::variable(1))),
      ExprNode::binary(Op::Mul, ExprNode::open_constant(),
                       ExprNode::variable(2)));
  Rng rng(7);
  for (auto _ : state) {
    ExprNode copy = model;
    benchmark::DoNotOptimize(
        fit_constants(copy, trial.inputs, trial.outputs, {}, rng));
  }
}
BENCHMARK(BM_FitConstants);

void BM_EnumerateTrees(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        enumerate_trees(static_cast<int>(state.range(0)), 2, 2));
  }
}
BENCHMARK(BM_EnumerateTrees)->Arg(5)->Arg(7)->Arg(9);

void BM_GpGeneration(benchmark::State& state) {
  const EquationSpec spec = bench_spec();
  GpConfig config;
  config.pool_size = 24;
  config.generations = 1;
  config.batch_size = 64;
  config.seed = 3;
  for (auto _ : state) {
    Oracle oracle(spec, {0.0, 5});
    benchmark::DoNotOptimize(run_gp({}, oracle, ControlSpec::all_free(3),
                                    bench_tokens(), config));
  }
}
BENCHMARK(BM_GpGeneration);

void BM_MctsEpisode(benchmark::State& state) {
  const EquationSpec spec = bench_spec();
  MctsConfig config;
  config.episodes = 1;
  config.num_simulations = 4;
  config.batch_size = 64;
  config.max_len = 24;
  config.seed = 3;
  for (auto _ : state) {
    Oracle oracle(spec, {0.0, 5});
    benchmark::DoNotOptimize(run_mcts(std::nullopt, oracle,
                                      ControlSpec::all_free(3),
                                      bench_tokens(), config));
  }
}
BENCHMARK(BM_MctsEpisode);

void BM_MutateCrossover(benchmark::State& state) {
  const TokenSet tokens = bench_tokens();
  Rng rng(11);
  ExprNode a = random_tree(tokens, 4, 0.4, rng);
  ExprNode b = random_tree(tokens, 4, 0.4, rng);
  for (auto _ : state) {
    mutate(a, tokens, 64, rng);
    crossover(a, b, 64, rng);
    benchmark::DoNotOptimize(a);
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_MutateCrossover);

} // namespace

BENCHMARK_MAIN();
