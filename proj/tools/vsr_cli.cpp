// Benchmark harness: dataset generation, algorithm runs with JSON-lines
// reports and CSV summaries, search-space counting, expression evaluation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <vsr/datasets.hpp>
#include <vsr/gp.hpp>
#include <vsr/mcts.hpp>
#include <vsr/metrics.hpp>
#include <vsr/report.hpp>
#include <vsr/rng.hpp>
#include <vsr/vertical.hpp>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitRunFailures = 1;
constexpr int kExitConfigError = 2;

std::vector<int> parse_config_triple(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ','))
    values.push_back(std::stoi(part));
  if (values.size() != 3)
    throw vsr::ConfigError("--config expects three comma-separated integers");
  return values;
}

std::vector<std::string> split_ops(const std::string& text) {
  std::vector<std::string> ops;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ','))
    if (!part.empty())
      ops.push_back(part);
  return ops;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOptions {
  std::string config = "2,1,1";
  std::string ops = "inv,add,sub,mul";
  int count = 10;
  std::uint64_t seed = 0;
  std::string out_dir = "trig";
};

int cmd_gen(const GenOptions& opt) {
  const std::vector<int> triple = parse_config_triple(opt.config);
  vsr::TrigConfig config;
  config.variables = triple[0];
  config.singular_terms = triple[1];
  config.pairwise_terms = triple[2];
  config.op_set = split_ops(opt.ops);
  if (opt.count < 0)
    throw vsr::ConfigError("--count must be non-negative");

  if (opt.count > 0)
    fs::create_directories(opt.out_dir);
  for (int k = 0; k < opt.count; ++k) {
    config.seed = vsr::derive_seed(opt.seed, static_cast<std::uint64_t>(k));
    const vsr::EquationSpec spec = vsr::gen_trig_expression(config);
    std::ostringstream name;
    name << "trig-" << triple[0] << '-' << triple[1] << '-' << triple[2]
         << '-' << (k < 10 ? "0" : "") << k << ".json";
    vsr::save_equation(spec, fs::path(opt.out_dir) / name.str());
  }
  std::cout << "wrote " << opt.count << " equation files to " << opt.out_dir
            << "\n";
  return kExitSuccess;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunOptions {
  std::string algorithm = "vsr-gp";
  std::vector<std::string> inputs;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out_path;     // JSON lines; empty = stdout
  std::string summary_path; // CSV; empty = skip
  bool timing = false;

  int generations = 200;
  int pool_size = 100;
  int episodes = 200;
  int simulations = 10;
  int trials = 5;
  int batch = 256;
  int max_nodes = 64;
  int max_len = 64;
  int best_set = 50;
  int test_size = 256;
  double early_stop = -1.0;
};

std::vector<fs::path> collect_equation_files(
    const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const std::string& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.path().extension() == ".json")
          files.push_back(entry.path());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw vsr::ConfigError("input not found: '" + input + "'");
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  if (files.empty())
    throw vsr::ConfigError("no equation files matched the inputs");
  return files;
}

std::string equation_id_for(const fs::path& file) {
  const std::string stem = file.stem().string();
  const std::string group = file.parent_path().filename().string();
  return group.empty() ? stem : group + "/" + stem;
}

struct TrainOutcome {
  vsr::ExprNode best;
  bool found = false;
  std::uint64_t oracle_rows = 0;
};

TrainOutcome train(const RunOptions& opt, const std::string& algorithm,
                   vsr::Oracle& oracle, const vsr::TokenSet& tokens,
                   std::uint64_t seed) {
  TrainOutcome outcome;
  const int num_vars = oracle.num_vars();

  vsr::GpConfig gp;
  gp.pool_size = opt.pool_size;
  gp.generations = opt.generations;
  gp.batch_size = opt.batch;
  gp.max_nodes = opt.max_nodes;
  gp.early_stop_fitness = opt.early_stop;
  gp.seed = seed;

  vsr::MctsConfig mcts;
  mcts.episodes = opt.episodes;
  mcts.num_simulations = opt.simulations;
  mcts.batch_size = opt.batch;
  mcts.max_len = opt.max_len;
  mcts.early_stop_fitness = opt.early_stop;
  mcts.seed = seed;

  if (algorithm == "gp") {
    const vsr::Population pool =
        vsr::run_gp({}, oracle, vsr::ControlSpec::all_free(num_vars), tokens,
                    gp);
    if (!pool.empty()) {
      outcome.best = pool.front().tree;
      outcome.found = true;
    }
  } else if (algorithm == "mcts") {
    const vsr::MctsResult result =
        vsr::run_mcts(std::nullopt, oracle,
                      vsr::ControlSpec::all_free(num_vars), tokens, mcts);
    outcome.best = result.best;
    outcome.found = result.found;
  } else if (algorithm == "vsr-gp" || algorithm == "vsr-mcts") {
    vsr::VsrConfig config;
    config.regressor = algorithm == "vsr-gp" ? vsr::RegressorKind::Gp
                                             : vsr::RegressorKind::Mcts;
    config.trials = opt.trials;
    config.best_set_capacity = opt.best_set;
    config.batch_size = opt.batch;
    config.gp = gp;
    config.mcts = mcts;
    config.seed = seed;
    const vsr::VsrResult result = vsr::run_vertical(oracle, tokens, config);
    outcome.best = result.best;
    outcome.found = !result.best_set.empty();
  } else {
    throw vsr::ConfigError("unknown algorithm '" + algorithm + "'");
  }
  outcome.oracle_rows = oracle.query_rows();
  return outcome;
}

double median_of(std::vector<double> values) {
  if (values.empty())
    return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1)
    return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int cmd_run(const RunOptions& opt) {
  const std::vector<fs::path> files = collect_equation_files(opt.inputs);
  if (opt.algorithm != "gp" && opt.algorithm != "vsr-gp" &&
      opt.algorithm != "mcts" && opt.algorithm != "vsr-mcts")
    throw vsr::ConfigError("unknown algorithm '" + opt.algorithm + "'");
  if (opt.noise < 0.0)
    throw vsr::ConfigError("--noise must be non-negative");

  std::ofstream out_file;
  if (!opt.out_path.empty()) {
    out_file.open(opt.out_path, std::ios::binary);
    if (!out_file)
      throw vsr::ConfigError("cannot write '" + opt.out_path + "'");
  }
  std::ostream& out = opt.out_path.empty() ? std::cout : out_file;

  struct GroupStats {
    std::vector<double> nmse;
    std::vector<vsr::MetricReport> metrics;
    double wall = 0.0;
  };
  std::map<std::string, GroupStats> groups;
  int failures = 0;

  for (const fs::path& file : files) {
    const std::string id = equation_id_for(file);
    vsr::RunReport report;
    report.equation_id = id;
    report.algorithm = opt.algorithm;
    report.seed = opt.seed;
    report.metrics = vsr::invalid_metrics();

    double wall = 0.0;
    try {
      const vsr::EquationSpec spec = vsr::load_equation(file);
      const std::uint64_t eq_seed =
          vsr::derive_seed(opt.seed, vsr::fnv1a(id));
      vsr::Oracle oracle(spec, {opt.noise, eq_seed});
      const vsr::TokenSet tokens =
          vsr::TokenSet::from_names(spec.function_set, spec.num_vars);

      const auto start = std::chrono::steady_clock::now();
      const TrainOutcome outcome =
          train(opt, opt.algorithm, oracle, tokens, eq_seed);
      wall = std::chrono::duration<double>(
                 std::chrono::steady_clock::now() - start)
                 .count();

      report.oracle_queries = outcome.oracle_rows;
      if (!outcome.found)
        throw vsr::Error("search produced no candidate expression");
      report.best_expression =
          vsr::preorder_string(outcome.best);

      // held-out data: fresh stream, drawn only after training finished
      vsr::Oracle test_oracle = oracle.fork(vsr::fnv1a("held-out"));
      const vsr::Oracle::Trial probe = test_oracle.sample_trial(
          vsr::ControlSpec::all_free(spec.num_vars), opt.test_size);
      const Eigen::VectorXd pred = vsr::evaluate(outcome.best, probe.inputs);
      report.metrics = vsr::compute_metrics(probe.outputs, pred);
      report.recovered = report.metrics.valid && report.metrics.r2 >= 0.999;
    } catch (const std::exception& e) {
      report.error = e.what();
      ++failures;
    }
    if (opt.timing)
      report.wall_time_seconds = wall;

    out << vsr::to_json_line(report) << "\n";
    out.flush();

    const std::string group = id.substr(0, id.find('/'));
    GroupStats& stats = groups[group];
    stats.nmse.push_back(report.metrics.valid
                             ? report.metrics.nmse
                             : std::numeric_limits<double>::infinity());
    stats.metrics.push_back(report.metrics);
    stats.wall += wall;
  }

  if (!opt.summary_path.empty()) {
    std::ofstream csv(opt.summary_path, std::ios::binary);
    if (!csv)
      throw vsr::ConfigError("cannot write '" + opt.summary_path + "'");
    csv << "group,algorithm,count,median_nmse,accuracy_0.999,"
           "wall_time_seconds\n";
    for (const auto& [group, stats] : groups) {
      csv << group << ',' << opt.algorithm << ',' << stats.metrics.size()
          << ',' << vsr::format_double(median_of(stats.nmse)) << ','
          << vsr::format_double(vsr::accuracy_at(stats.metrics, 0.999)) << ','
          << vsr::format_double(stats.wall) << "\n";
    }
  }
  return failures == 0 ? kExitSuccess : kExitRunFailures;
}

// ---------------------------------------------------------------------------
// count-space
// ---------------------------------------------------------------------------

struct CountOptions {
  int max_size = 9;
  int num_vars = 2;
  int num_ops = 2;
};

std::uint64_t closed_form_count(int nodes, int num_vars, int num_ops) {
  const int k = (nodes - 1) / 2;
  std::uint64_t catalan = 1;
  for (int i = 0; i < k; ++i) // C_{i+1} = C_i * 2(2i+1)/(i+2)
    catalan = catalan * 2 * (2 * i + 1) / (i + 2);
  std::uint64_t total = catalan;
  for (int i = 0; i < k + 1; ++i)
    total *= static_cast<std::uint64_t>(num_vars + 1);
  for (int i = 0; i < k; ++i)
    total *= static_cast<std::uint64_t>(num_ops);
  return total;
}

int cmd_count_space(const CountOptions& opt) {
  if (opt.max_size < 1 || opt.max_size > 11)
    throw vsr::ConfigError("--max-size must lie in [1, 11]");
  std::cout << "nodes,enumerated,closed_form\n";
  for (int nodes = 1; nodes <= opt.max_size; nodes += 2) {
    const std::uint64_t closed =
        closed_form_count(nodes, opt.num_vars, opt.num_ops);
    std::uint64_t enumerated = 0;
    if (closed <= 2000000) {
      enumerated = vsr::enumerate_trees(nodes, opt.num_vars, opt.num_ops);
      std::cout << nodes << ',' << enumerated << ',' << closed << "\n";
      if (enumerated != closed)
        throw vsr::Error("enumeration disagrees with the closed form");
    } else {
      std::cout << nodes << ",-," << closed << "\n";
    }
  }
  return kExitSuccess;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string expression_path;
  std::string equation_path;
  int samples = 256;
  std::uint64_t seed = 0;
  double noise = 0.0;
  bool mean_baseline = false;
};

int cmd_eval(const EvalOptions& opt) {
  const vsr::EquationSpec spec = vsr::load_equation(opt.equation_path);
  vsr::Oracle oracle(spec, {opt.noise, opt.seed});
  const vsr::Oracle::Trial probe = oracle.sample_trial(
      vsr::ControlSpec::all_free(spec.num_vars), opt.samples);

  Eigen::VectorXd pred;
  if (opt.mean_baseline) {
    pred = Eigen::VectorXd::Constant(probe.outputs.size(),
                                     probe.outputs.mean());
  } else {
    if (opt.expression_path.empty())
      throw vsr::ConfigError("--expression is required without "
                             "--mean-baseline");
    std::ifstream in(opt.expression_path);
    if (!in)
      throw vsr::ConfigError("cannot open '" + opt.expression_path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    const vsr::ExprNode tree = vsr::tree_from_preorder_string(text);
    pred = vsr::evaluate(tree, probe.inputs);
  }

  const vsr::MetricReport metrics = vsr::compute_metrics(probe.outputs, pred);
  ordered_json j;
  auto put = [&j](const char* key, double v) {
    j[key] = std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
  };
  put("mse", metrics.mse);
  put("nmse", metrics.nmse);
  put("rmse", metrics.rmse);
  put("nrmse", metrics.nrmse);
  put("inv_nmse", metrics.inv_nmse);
  put("inv_nrmse", metrics.inv_nrmse);
  put("r2", metrics.r2);
  j["valid"] = metrics.valid;
  std::cout << j.dump() << "\n";
  return kExitSuccess;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"control-variable symbolic regression toolkit"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen", "generate synthetic equation files");
  gen_cmd->add_option("--config", gen.config,
                      "variables,singular-terms,pairwise-terms");
  gen_cmd->add_option("--ops", gen.ops, "comma-separated operator set");
  gen_cmd->add_option("--count", gen.count, "number of equations");
  gen_cmd->add_option("--seed", gen.seed, "master seed");
  gen_cmd->add_option("--out", gen.out_dir, "output directory");

  RunOptions run;
  CLI::App* run_cmd =
      app.add_subcommand("run", "run an algorithm over equation files");
  run_cmd->add_option("--algorithm", run.algorithm,
                      "gp, vsr-gp, mcts or vsr-mcts");
  run_cmd->add_option("inputs", run.inputs,
                      "equation files or directories")
      ->required();
  run_cmd->add_option("--noise", run.noise, "oracle noise sigma");
  run_cmd->add_option("--seed", run.seed, "master seed");
  run_cmd->add_option("--out", run.out_path, "JSON-lines report path");
  run_cmd->add_option("--summary", run.summary_path, "CSV summary path");
  run_cmd->add_flag("--timing", run.timing,
                    "include wall time in report lines");
  run_cmd->add_option("--generations", run.generations,
                      "GP generations (per round for vsr-gp)");
  run_cmd->add_option("--pool", run.pool_size, "GP pool size");
  run_cmd->add_option("--episodes", run.episodes,
                      "MCTS episodes (per round for vsr-mcts)");
  run_cmd->add_option("--simulations", run.simulations,
                      "MCTS rollouts per expansion");
  run_cmd->add_option("--trials", run.trials,
                      "controlled trials per freeze decision");
  run_cmd->add_option("--batch", run.batch, "training batch size");
  run_cmd->add_option("--max-nodes", run.max_nodes, "GP tree size cap");
  run_cmd->add_option("--max-len", run.max_len, "MCTS expression size cap");
  run_cmd->add_option("--best-set", run.best_set, "best-set capacity");
  run_cmd->add_option("--test-size", run.test_size, "held-out sample count");
  run_cmd->add_option("--early-stop", run.early_stop,
                      "stop once training fitness reaches this value");

  CountOptions count;
  CLI::App* count_cmd = app.add_subcommand(
      "count-space", "tabulate candidate-expression counts");
  count_cmd->add_option("--max-size", count.max_size,
                        "largest (odd) node count");
  count_cmd->add_option("--num-vars", count.num_vars, "variable count");
  count_cmd->add_option("--num-ops", count.num_ops, "binary operator count");

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "score an expression against an equation's data");
  eval_cmd->add_option("--expression", eval.expression_path,
                       "file holding a pre-order token string");
  eval_cmd->add_option("--equation", eval.equation_path, "equation file")
      ->required();
  eval_cmd->add_option("--samples", eval.samples, "sample count");
  eval_cmd->add_option("--seed", eval.seed, "sampling seed");
  eval_cmd->add_option("--noise", eval.noise, "oracle noise sigma");
  eval_cmd->add_flag("--mean-baseline", eval.mean_baseline,
                     "score the constant mean predictor instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitConfigError;
  }

  try {
    if (gen_cmd->parsed())
      return cmd_gen(gen);
    if (run_cmd->parsed())
      return cmd_run(run);
    if (count_cmd->parsed())
      return cmd_count_space(count);
    if (eval_cmd->parsed())
      return cmd_eval(eval);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitSuccess;
}
