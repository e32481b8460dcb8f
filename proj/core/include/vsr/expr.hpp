#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vsr/errors.hpp"

namespace vsr {

/// Closed operator/terminal vocabulary.
enum class Op : std::uint8_t { Add, Sub, Mul, Div, Inv, Sin, Cos, Const, Var };

int arity(Op op);
std::string_view token_name(Op op); // operators only; Const/Var have no fixed token
std::optional<Op> op_from_token(std::string_view token);

/// Role of a constant slot.
///  - Unfitted: free slot, value (if any) is a fitting artifact
///  - StandAlone: a genuine constant of the target; value pinned, not refit
///  - Summary: absorbs the contribution of variables still held constant;
///    value is batch-dependent and the slot stays editable
enum class ConstKind : std::uint8_t { Unfitted, StandAlone, Summary };

struct ExprNode {
  Op op = Op::Const;
  int var_index = -1;           // valid when op == Var (0-based)
  std::optional<double> value;  // valid when op == Const
  ConstKind const_kind = ConstKind::Unfitted;
  bool editable = true;
  std::uint32_t tag = 0;        // opaque caller-owned marker, copied with the node
  std::vector<ExprNode> children;

  static ExprNode constant(double v);
  static ExprNode open_constant();
  static ExprNode variable(int index);
  static ExprNode unary(Op op, ExprNode child);
  static ExprNode binary(Op op, ExprNode lhs, ExprNode rhs);
};

int node_count(const ExprNode& n);
int tree_depth(const ExprNode& n);

/// Throws StructuralError if any node has the wrong number of children
/// or an invalid payload (negative variable index, constant with children...).
void check_arity(const ExprNode& n);

/// Same shape, same tokens, same constant values. Editability, constant
/// classification and tags are not part of the comparison.
bool structurally_equal(const ExprNode& a, const ExprNode& b);

/// True when every node of the subtree is editable.
bool fully_editable(const ExprNode& n);

void set_editable_all(ExprNode& n, bool editable);

/// Batch evaluation over a row-per-sample input matrix.
/// Division by zero and domain violations follow IEEE semantics: Inf and NaN
/// values propagate through parent operators, nothing traps.
Eigen::VectorXd evaluate(const ExprNode& tree, const Eigen::MatrixXd& inputs);

// ---------------------------------------------------------------------------
// Serialization: extended pre-order traversal.
// Every node becomes a (token, kind) pair; kind disambiguates arity so the
// reader can rebuild the tree without a grammar.
// Variables are written 1-based ("x1" is column 0), constants as decimal
// strings with shortest round-trip formatting.
// ---------------------------------------------------------------------------

enum class SymbolKind : std::uint8_t { Binary, Unary, Const, Var };

std::string_view symbol_kind_name(SymbolKind k);
SymbolKind symbol_kind_from_name(std::string_view name);

struct PreorderToken {
  std::string text;
  SymbolKind kind;
};
using PreorderRecord = std::vector<PreorderToken>;

PreorderRecord serialize_preorder(const ExprNode& tree);
ExprNode deserialize_preorder(const PreorderRecord& record);

/// Space-separated token stream; kinds are recoverable because the operator
/// vocabulary is closed ("x<k>" is a variable, any other non-operator token
/// must parse as a number).
std::string preorder_string(const ExprNode& tree);
ExprNode tree_from_preorder_string(std::string_view text);

/// Human-oriented rendering with infix operators and minimal parentheses.
std::string infix_string(const ExprNode& tree);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);
/// Strict parse; the whole token must be consumed.
double parse_double(std::string_view text);

// ---------------------------------------------------------------------------
// Constant slots
// ---------------------------------------------------------------------------

/// Open slots are the ones a fit is allowed to move: every Const node that is
/// not a frozen stand-alone constant. Pre-order order.
std::vector<ExprNode*> collect_open_constants(ExprNode& tree);
std::vector<const ExprNode*> collect_open_constants(const ExprNode& tree);
int count_open_constants(const ExprNode& tree);

// ---------------------------------------------------------------------------
// Token sets: which symbols a search step may introduce.
// ---------------------------------------------------------------------------

struct TokenSet {
  std::vector<Op> binary_ops;
  std::vector<Op> unary_ops;
  std::vector<int> variables;  // permitted variable indices, 0-based
  bool allow_const = true;

  /// Build from operator token names ("add", "inv", ...). "const" toggles
  /// allow_const; unknown names throw ConfigError. Variables default to
  /// 0..num_vars-1.
  static TokenSet from_names(std::span<const std::string> names, int num_vars);

  bool has_ops() const { return !binary_ops.empty() || !unary_ops.empty(); }
};

// ---------------------------------------------------------------------------
// Exhaustive enumeration of expression trees with `nodes` nodes over
// `num_vars` variables, one constant placeholder leaf and `num_binary_ops`
// binary operators (no unaries). Guarded to odd node counts <= 11.
// ---------------------------------------------------------------------------

void for_each_tree(int nodes, int num_vars, int num_binary_ops,
                   const std::function<void(const ExprNode&)>& visit);
std::uint64_t enumerate_trees(int nodes, int num_vars, int num_binary_ops);

} // namespace vsr
