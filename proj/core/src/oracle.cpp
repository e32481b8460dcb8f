#include "vsr/oracle.hpp"

#include <algorithm>
#include <set>

namespace vsr {

void validate(const EquationSpec& spec) {
  if (spec.num_vars < 1)
    throw SchemaError("num_vars must be at least 1");
  if (static_cast<int>(spec.var_domains.size()) != spec.num_vars)
    throw SchemaError("var_domains size does not match num_vars");
  for (int i = 0; i < spec.num_vars; ++i) {
    const auto& d = spec.var_domains[i];
    if (!(d[0] < d[1]))
      throw SchemaError("var_domains[" + std::to_string(i) +
                        "]: low must be less than high");
  }
  for (const auto& name : spec.function_set) {
    if (name == "const")
      continue;
    if (!op_from_token(name))
      throw SchemaError("function_set contains unknown token '" + name + "'");
  }
  ExprNode tree = deserialize_preorder(spec.equation); // throws ParseError
  // every operator used must be declared; constants are always allowed
  std::set<std::string> declared(spec.function_set.begin(),
                                 spec.function_set.end());
  for (const auto& tok : spec.equation) {
    if (tok.kind == SymbolKind::Binary || tok.kind == SymbolKind::Unary) {
      if (!declared.count(tok.text))
        throw SchemaError("equation uses operator '" + tok.text +
                          "' missing from function_set");
    }
  }
  const std::function<void(const ExprNode&)> walk = [&](const ExprNode& n) {
    if (n.op == Op::Var && n.var_index >= spec.num_vars)
      throw SchemaError("equation references x" +
                        std::to_string(n.var_index + 1) +
                        " but num_vars is " + std::to_string(spec.num_vars));
    for (const auto& c : n.children)
      walk(c);
  };
  walk(tree);
}

ControlSpec ControlSpec::controlling(int num_vars,
                                     std::vector<int> controlled) {
  ControlSpec cs;
  cs.controlled = std::move(controlled);
  std::sort(cs.controlled.begin(), cs.controlled.end());
  std::set<int> ctl(cs.controlled.begin(), cs.controlled.end());
  if (ctl.size() != cs.controlled.size())
    throw ConfigError("duplicate controlled variable");
  for (int v = 0; v < num_vars; ++v)
    if (!ctl.count(v))
      cs.free_vars.push_back(v);
  cs.validate(num_vars);
  return cs;
}

ControlSpec ControlSpec::all_free(int num_vars) {
  return controlling(num_vars, {});
}

void ControlSpec::validate(int num_vars) const {
  std::vector<bool> seen(num_vars, false);
  auto mark = [&](int v) {
    if (v < 0 || v >= num_vars)
      throw ConfigError("control spec references variable out of range");
    if (seen[v])
      throw ConfigError("control spec assigns a variable twice");
    seen[v] = true;
  };
  for (int v : controlled)
    mark(v);
  for (int v : free_vars)
    mark(v);
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ConfigError("control spec does not cover every variable");
}

Oracle::Oracle(EquationSpec spec, OracleConfig cfg)
    : spec_(std::move(spec)), cfg_(cfg),
      tree_(deserialize_preorder(spec_.equation)), rng_(cfg.seed) {
  vsr::validate(spec_);
  if (cfg_.noise_sigma < 0.0)
    throw ConfigError("noise_sigma must be non-negative");
}

Eigen::VectorXd Oracle::evaluate(const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != spec_.num_vars)
    throw ConfigError("oracle input has " + std::to_string(inputs.cols()) +
                      " columns, equation takes " +
                      std::to_string(spec_.num_vars));
  ++calls_;
  rows_ += static_cast<std::uint64_t>(inputs.rows());
  Eigen::VectorXd y = vsr::evaluate(tree_, inputs);
  if (cfg_.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg_.noise_sigma);
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y[i] += noise(rng_);
  }
  return y;
}

Oracle::Trial Oracle::sample_trial(const ControlSpec& control,
                                   int batch_size) {
  control.validate(spec_.num_vars);
  std::vector<std::pair<int, double>> pinned;
  pinned.reserve(control.controlled.size());
  for (int v : control.controlled) {
    const auto& d = spec_.var_domains[v];
    std::uniform_real_distribution<double> u(d[0], d[1]);
    pinned.emplace_back(v, u(rng_));
  }
  return sample_trial_at(control, pinned, batch_size);
}

Oracle::Trial Oracle::sample_trial_at(
    const ControlSpec& control,
    std::span<const std::pair<int, double>> pinned, int batch_size) {
  control.validate(spec_.num_vars);
  if (batch_size < 1)
    throw ConfigError("batch_size must be positive");
  if (pinned.size() != control.controlled.size())
    throw ConfigError("pinned values do not match the controlled set");

  Trial trial;
  trial.inputs.resize(batch_size, spec_.num_vars);
  trial.controlled_values.assign(pinned.begin(), pinned.end());
  for (const auto& [v, value] : trial.controlled_values) {
    if (std::find(control.controlled.begin(), control.controlled.end(), v) ==
        control.controlled.end())
      throw ConfigError("pinned value for a variable that is not controlled");
    trial.inputs.col(v).setConstant(value);
  }
  for (int row = 0; row < batch_size; ++row) {
    for (int v : control.free_vars) {
      const auto& d = spec_.var_domains[v];
      std::uniform_real_distribution<double> u(d[0], d[1]);
      trial.inputs(row, v) = u(rng_);
    }
  }
  trial.outputs = evaluate(trial.inputs);
  return trial;
}

Oracle Oracle::fork(std::uint64_t stream) const {
  OracleConfig cfg = cfg_;
  cfg.seed = derive_seed(cfg_.seed, stream);
  return Oracle(spec_, cfg);
}

} // namespace vsr
