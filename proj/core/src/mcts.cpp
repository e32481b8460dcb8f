#include "vsr/mcts.hpp"

#include <cmath>
#include <limits>

#include "vsr/metrics.hpp"

namespace vsr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Grammar build_grammar(const TokenSet& tokens) {
  Grammar g;
  for (Op op : tokens.binary_ops)
    g.rules.push_back({GrammarRule::Kind::Binary, op, -1});
  for (Op op : tokens.unary_ops)
    g.rules.push_back({GrammarRule::Kind::Unary, op, -1});
  if (tokens.allow_const)
    g.rules.push_back({GrammarRule::Kind::ConstLeaf, Op::Const, -1});
  for (int v : tokens.variables)
    g.rules.push_back({GrammarRule::Kind::VarLeaf, Op::Var, v});
  if (!tokens.allow_const && tokens.variables.empty())
    throw ConfigError("build_grammar: no leaf rules, grammar cannot terminate");
  return g;
}

FormSymbol FormSymbol::nt() {
  FormSymbol s;
  s.nonterminal = true;
  return s;
}

FormSymbol FormSymbol::terminal(const ExprNode& node) {
  FormSymbol s;
  s.nonterminal = false;
  s.op = node.op;
  s.var_index = node.var_index;
  s.value = node.value;
  s.const_kind = node.const_kind;
  s.editable = node.editable;
  return s;
}

bool form_complete(const SententialForm& form) {
  for (const auto& s : form)
    if (s.nonterminal)
      return false;
  return true;
}

SententialForm form_from_tree(const ExprNode& tree) {
  // every open constant slot reopens as a nonterminal; only stand-alone
  // (pinned) constants stay literal
  SententialForm form;
  const std::function<void(const ExprNode&)> walk = [&](const ExprNode& n) {
    if (n.op == Op::Const && n.const_kind != ConstKind::StandAlone) {
      form.push_back(FormSymbol::nt());
      return;
    }
    form.push_back(FormSymbol::terminal(n));
    for (const auto& c : n.children)
      walk(c);
  };
  walk(tree);
  return form;
}

namespace {

ExprNode parse_form(const SententialForm& form, std::size_t& pos) {
  if (pos >= form.size())
    throw StructuralError("sentential form ended mid-expression");
  const FormSymbol& s = form[pos++];
  if (s.nonterminal)
    throw StructuralError("sentential form still contains a nonterminal");
  ExprNode n;
  n.op = s.op;
  n.var_index = s.var_index;
  n.value = s.value;
  n.const_kind = s.const_kind;
  n.editable = s.editable;
  const int k = arity(s.op);
  n.children.reserve(k);
  for (int i = 0; i < k; ++i)
    n.children.push_back(parse_form(form, pos));
  return n;
}

} // namespace

ExprNode tree_from_form(const SententialForm& form) {
  std::size_t pos = 0;
  ExprNode tree = parse_form(form, pos);
  if (pos != form.size())
    throw StructuralError("sentential form has trailing symbols");
  return tree;
}

std::optional<SententialForm> apply_rule(const SententialForm& form,
                                         const GrammarRule& rule,
                                         int max_len) {
  std::size_t at = form.size();
  for (std::size_t i = 0; i < form.size(); ++i) {
    if (form[i].nonterminal) {
      at = i;
      break;
    }
  }
  if (at == form.size())
    throw StructuralError("apply_rule: form has no nonterminal");

  int growth = 0;
  switch (rule.kind) {
  case GrammarRule::Kind::Binary: growth = 2; break;
  case GrammarRule::Kind::Unary: growth = 1; break;
  default: growth = 0;
  }
  // only growth is capped; leaf rules stay legal even at the cap
  if (growth > 0 && static_cast<int>(form.size()) + growth > max_len)
    return std::nullopt;

  SententialForm out;
  out.reserve(form.size() + growth);
  out.insert(out.end(), form.begin(), form.begin() + at);
  switch (rule.kind) {
  case GrammarRule::Kind::Binary: {
    FormSymbol op;
    op.op = rule.op;
    out.push_back(op);
    out.push_back(FormSymbol::nt());
    out.push_back(FormSymbol::nt());
    break;
  }
  case GrammarRule::Kind::Unary: {
    FormSymbol op;
    op.op = rule.op;
    out.push_back(op);
    out.push_back(FormSymbol::nt());
    break;
  }
  case GrammarRule::Kind::ConstLeaf: {
    FormSymbol c;
    c.op = Op::Const; // open slot, value assigned by fitting
    out.push_back(c);
    break;
  }
  case GrammarRule::Kind::VarLeaf: {
    FormSymbol v;
    v.op = Op::Var;
    v.var_index = rule.var_index;
    out.push_back(v);
    break;
  }
  }
  out.insert(out.end(), form.begin() + at + 1, form.end());
  return out;
}

double ucb_score(const MctsNode& node, int rule, double exploration) {
  const auto& e = node.edges.at(rule);
  if (e.count == 0)
    return kInf;
  const double mean = e.reward_sum / e.count;
  const double n = std::max(1, node.visits);
  return mean + exploration * std::sqrt(std::log(n) / e.count);
}

namespace {

MctsNode* select_best_leaf(MctsNode* root, double exploration) {
  MctsNode* node = root;
  while (node->expanded) {
    int best_rule = -1;
    double best_score = -kInf;
    for (std::size_t r = 0; r < node->edges.size(); ++r) {
      if (!node->edges[r].child)
        continue;
      const double s = ucb_score(*node, static_cast<int>(r), exploration);
      if (s > best_score) {
        best_score = s;
        best_rule = static_cast<int>(r);
      }
    }
    if (best_rule < 0)
      break; // expanded but childless: nothing below to visit
    node = node->edges[best_rule].child.get();
  }
  return node;
}

void expand(MctsNode* node, const Grammar& grammar, int max_len) {
  node->edges.resize(grammar.rules.size());
  for (std::size_t r = 0; r < grammar.rules.size(); ++r) {
    auto next = apply_rule(node->form, grammar.rules[r], max_len);
    if (next) {
      auto child = std::make_unique<MctsNode>();
      child->form = std::move(*next);
      child->parent = node;
      child->parent_rule = static_cast<int>(r);
      node->edges[r].child = std::move(child);
    }
  }
  node->expanded = true;
}

SententialForm complete_form(SententialForm form, const Grammar& grammar,
                             int max_len, Rng& rng) {
  // leaf rules never grow the form, so completion always terminates
  std::vector<int> applicable;
  for (int guard = 0; guard < 16 * max_len; ++guard) {
    if (form_complete(form))
      return form;
    applicable.clear();
    for (std::size_t r = 0; r < grammar.rules.size(); ++r) {
      int growth = 0;
      switch (grammar.rules[r].kind) {
      case GrammarRule::Kind::Binary: growth = 2; break;
      case GrammarRule::Kind::Unary: growth = 1; break;
      default: growth = 0;
      }
      if (growth == 0 || static_cast<int>(form.size()) + growth <= max_len)
        applicable.push_back(static_cast<int>(r));
    }
    std::uniform_int_distribution<std::size_t> pick(0, applicable.size() - 1);
    form = *apply_rule(form, grammar.rules[applicable[pick(rng)]], max_len);
  }
  throw StructuralError("rollout failed to terminate");
}

void backprop(MctsNode* leaf, int count, double reward_sum) {
  leaf->visits += count;
  MctsNode* node = leaf;
  while (node->parent) {
    MctsNode* parent = node->parent;
    auto& edge = parent->edges[node->parent_rule];
    edge.count += count;
    edge.reward_sum += reward_sum;
    parent->visits += count;
    node = parent;
  }
}

} // namespace

MctsResult run_mcts(const std::optional<ExprNode>& initial, Oracle& oracle,
                    const ControlSpec& control, const TokenSet& tokens,
                    const MctsConfig& config) {
  if (config.episodes < 0)
    throw ConfigError("run_mcts: negative episode count");
  if (config.num_simulations < 1)
    throw ConfigError("run_mcts: need at least one simulation per child");
  if (config.max_len < 1)
    throw ConfigError("run_mcts: max_len must be positive");

  const Grammar grammar = build_grammar(tokens);
  Rng rng(config.seed);

  auto root = std::make_unique<MctsNode>();
  root->form = initial ? form_from_tree(*initial)
                       : SententialForm{FormSymbol::nt()};

  MctsResult result;
  result.best = ExprNode::constant(0.0);
  result.best_fitness = kInf;
  int best_nodes = std::numeric_limits<int>::max();

  const auto score_form = [&](const SententialForm& form) {
    ExprNode tree = tree_from_form(form);
    Oracle::Trial trial = oracle.sample_trial(control, config.batch_size);
    FitResult fit =
        fit_constants(tree, trial.inputs, trial.outputs, config.fit, rng);
    ++result.fits;
    const double var = population_variance(trial.outputs);
    double reward;
    if (!std::isfinite(fit.fitness))
      reward = 0.0;
    else if (var > 0.0)
      reward = 1.0 / (1.0 + fit.fitness / var);
    else
      reward = 1.0 / (1.0 + fit.fitness); // flat batch; fall back unnormalized
    // among candidates that already clear the stop threshold the fitness
    // ordering is numerical noise, so prefer the smaller tree instead:
    // random rollouts routinely pad an exact fit with redundant structure
    const int nodes = node_count(tree);
    const bool solved = config.early_stop_fitness >= 0.0 &&
                        fit.fitness <= config.early_stop_fitness;
    const bool best_solved = config.early_stop_fitness >= 0.0 &&
                             result.best_fitness <= config.early_stop_fitness;
    bool better;
    if (solved && best_solved)
      better = nodes < best_nodes ||
               (nodes == best_nodes && fit.fitness < result.best_fitness);
    else
      better = fit.fitness < result.best_fitness ||
               (fit.fitness == result.best_fitness && nodes < best_nodes);
    if (better) {
      result.best_fitness = fit.fitness;
      result.best = std::move(tree);
      best_nodes = nodes;
      result.found = true;
    }
    return reward;
  };

  // the first rollout to clear the stop threshold is usually padded with
  // redundant structure, so linger a few episodes and let the node-count
  // preference above settle on a leaner equivalent before stopping
  constexpr int kSolvePatience = 10;
  int solved_at = -1;

  for (int episode = 0; episode < config.episodes; ++episode) {
    if (config.max_fits != 0 && result.fits >= config.max_fits)
      break; // fit budget spent
    result.episodes_run = episode + 1;
    MctsNode* node = select_best_leaf(root.get(), config.exploration);

    if (form_complete(node->form)) {
      // a finished expression: episodes re-fit it on fresh batches
      double sum = 0.0;
      for (int s = 0; s < config.num_simulations; ++s)
        sum += score_form(node->form);
      backprop(node, config.num_simulations, sum);
    } else {
      if (!node->expanded)
        expand(node, grammar, config.max_len);
      for (auto& edge : node->edges) {
        if (!edge.child)
          continue;
        double sum = 0.0;
        for (int s = 0; s < config.num_simulations; ++s)
          sum += score_form(
              complete_form(edge.child->form, grammar, config.max_len, rng));
        backprop(edge.child.get(), config.num_simulations, sum);
      }
    }

    if (config.early_stop_fitness >= 0.0 &&
        result.best_fitness <= config.early_stop_fitness) {
      if (solved_at < 0)
        solved_at = episode;
      if (episode - solved_at >= kSolvePatience)
        break;
    }
  }
  return result;
}

} // namespace vsr
