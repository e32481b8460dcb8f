#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "vsr/expr.hpp"
#include "vsr/fit.hpp"
#include "vsr/oracle.hpp"

namespace vsr {

/// Production rules of a context-free grammar with a single nonterminal A:
///   A -> op(A, A) | u(A) | const | x_i
/// Rule order is fixed (binary ops, unary ops, const, variables ascending)
/// so tie-breaking and traversal are deterministic.
struct GrammarRule {
  enum class Kind : std::uint8_t { Binary, Unary, ConstLeaf, VarLeaf };
  Kind kind;
  Op op = Op::Const;  // Binary/Unary rules
  int var_index = -1; // VarLeaf rules
};

struct Grammar {
  std::vector<GrammarRule> rules;
};

Grammar build_grammar(const TokenSet& tokens);

/// One symbol of a sentential form: either the nonterminal or a terminal
/// carrying the payload of the expression node it will become.
struct FormSymbol {
  bool nonterminal = false;
  Op op = Op::Const;
  int var_index = -1;
  std::optional<double> value;
  ConstKind const_kind = ConstKind::Unfitted;
  bool editable = true;

  static FormSymbol nt();
  static FormSymbol terminal(const ExprNode& node);
};
using SententialForm = std::vector<FormSymbol>;

bool form_complete(const SententialForm& form);

/// Pre-order serialization of a tree into a form. Summary constants become
/// the nonterminal (they are the expansion points for newly freed
/// variables); everything else is copied as a terminal.
SententialForm form_from_tree(const ExprNode& tree);

/// Parse a completed form back into a tree, payload included.
/// Throws StructuralError when the form still contains nonterminals or is
/// not a valid pre-order sequence.
ExprNode tree_from_form(const SententialForm& form);

/// Rewrite the leftmost nonterminal with `rule`. Returns nullopt when the
/// result would exceed max_len symbols; throws StructuralError when the form
/// is already complete.
std::optional<SententialForm> apply_rule(const SententialForm& form,
                                         const GrammarRule& rule,
                                         int max_len);

struct MctsConfig {
  int episodes = 200;
  int num_simulations = 10; // rollouts per child per episode
  double exploration = 1.4; // UCB exploration constant
  int max_len = 64;         // symbol cap per expression
  int batch_size = 256;
  FitOptions fit;
  double early_stop_fitness = -1.0; // stop once reached; off if negative
  std::uint64_t max_fits = 0;       // constant-fit budget, checked at episode
                                    // boundaries; 0 = unlimited
  std::uint64_t seed = 0;
};

struct MctsNode {
  SententialForm form;
  MctsNode* parent = nullptr;
  int parent_rule = -1;
  int visits = 0;
  bool expanded = false;
  struct Edge {
    int count = 0;
    double reward_sum = 0.0;
    std::unique_ptr<MctsNode> child;
  };
  std::vector<Edge> edges; // one per grammar rule once expanded
};

/// Upper confidence bound of one edge; +Inf while the edge is unvisited.
double ucb_score(const MctsNode& node, int rule, double exploration);

struct MctsResult {
  ExprNode best;
  double best_fitness = 0.0;
  bool found = false;
  std::uint64_t fits = 0;
  int episodes_run = 0;
};

/// Monte Carlo tree search over the grammar. The root is the sentential form
/// of `initial` when provided (summary constants opened as nonterminals),
/// otherwise the bare nonterminal. Each episode descends by UCB, expands one
/// node, runs num_simulations random completions per child (fitting constants
/// on fresh oracle batches), and backs the rewards up the path. Rewards use
/// the inverted normalized error; final ranking uses the raw error.
MctsResult run_mcts(const std::optional<ExprNode>& initial, Oracle& oracle,
                    const ControlSpec& control, const TokenSet& tokens,
                    const MctsConfig& config);

} // namespace vsr
