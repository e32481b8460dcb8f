#include "vsr/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>
#include <utility>

namespace vsr {

namespace {

struct OpInfo {
  Op op;
  std::string_view token;
  int arity;
};

constexpr std::array<OpInfo, 7> kOps{{
    {Op::Add, "add", 2},
    {Op::Sub, "sub", 2},
    {Op::Mul, "mul", 2},
    {Op::Div, "div", 2},
    {Op::Inv, "inv", 1},
    {Op::Sin, "sin", 1},
    {Op::Cos, "cos", 1},
}};

} // namespace

int arity(Op op) {
  switch (op) {
  case Op::Add:
  case Op::Sub:
  case Op::Mul:
  case Op::Div:
    return 2;
  case Op::Inv:
  case Op::Sin:
  case Op::Cos:
    return 1;
  case Op::Const:
  case Op::Var:
    return 0;
  }
  throw StructuralError("unknown operator");
}

std::string_view token_name(Op op) {
  for (const auto& info : kOps)
    if (info.op == op)
      return info.token;
  throw StructuralError("token_name: not an operator");
}

std::optional<Op> op_from_token(std::string_view token) {
  for (const auto& info : kOps)
    if (info.token == token)
      return info.op;
  return std::nullopt;
}

ExprNode ExprNode::constant(double v) {
  ExprNode n;
  n.op = Op::Const;
  n.value = v;
  return n;
}

ExprNode ExprNode::open_constant() {
  ExprNode n;
  n.op = Op::Const;
  return n;
}

ExprNode ExprNode::variable(int index) {
  if (index < 0)
    throw StructuralError("variable index must be non-negative");
  ExprNode n;
  n.op = Op::Var;
  n.var_index = index;
  return n;
}

ExprNode ExprNode::unary(Op op, ExprNode child) {
  if (arity(op) != 1)
    throw StructuralError("unary() requires a unary operator");
  ExprNode n;
  n.op = op;
  n.children.push_back(std::move(child));
  return n;
}

ExprNode ExprNode::binary(Op op, ExprNode lhs, ExprNode rhs) {
  if (arity(op) != 2)
    throw StructuralError("binary() requires a binary operator");
  ExprNode n;
  n.op = op;
  n.children.reserve(2);
  n.children.push_back(std::move(lhs));
  n.children.push_back(std::move(rhs));
  return n;
}

int node_count(const ExprNode& n) {
  int total = 1;
  for (const auto& c : n.children)
    total += node_count(c);
  return total;
}

int tree_depth(const ExprNode& n) {
  int best = 0;
  for (const auto& c : n.children)
    best = std::max(best, tree_depth(c));
  return best + 1;
}

void check_arity(const ExprNode& n) {
  if (static_cast<int>(n.children.size()) != arity(n.op))
    throw StructuralError("node has wrong number of children");
  if (n.op == Op::Var && n.var_index < 0)
    throw StructuralError("variable node without index");
  for (const auto& c : n.children)
    check_arity(c);
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op)
    return false;
  if (a.op == Op::Var && a.var_index != b.var_index)
    return false;
  if (a.op == Op::Const) {
    if (a.value.has_value() != b.value.has_value())
      return false;
    if (a.value && *a.value != *b.value)
      return false;
  }
  if (a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i]))
      return false;
  return true;
}

bool fully_editable(const ExprNode& n) {
  if (!n.editable)
    return false;
  for (const auto& c : n.children)
    if (!fully_editable(c))
      return false;
  return true;
}

void set_editable_all(ExprNode& n, bool editable) {
  n.editable = editable;
  for (auto& c : n.children)
    set_editable_all(c, editable);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

Eigen::ArrayXd eval_node(const ExprNode& n, const Eigen::MatrixXd& X) {
  switch (n.op) {
  case Op::Const:
    if (!n.value)
      throw StructuralError("evaluate: constant slot has no value");
    return Eigen::ArrayXd::Constant(X.rows(), *n.value);
  case Op::Var:
    if (n.var_index < 0 || n.var_index >= X.cols())
      throw StructuralError("evaluate: variable index out of range");
    return X.col(n.var_index).array();
  case Op::Add:
    return eval_node(n.children[0], X) + eval_node(n.children[1], X);
  case Op::Sub:
    return eval_node(n.children[0], X) - eval_node(n.children[1], X);
  case Op::Mul:
    return eval_node(n.children[0], X) * eval_node(n.children[1], X);
  case Op::Div:
    return eval_node(n.children[0], X) / eval_node(n.children[1], X);
  case Op::Inv:
    return 1.0 / eval_node(n.children[0], X);
  case Op::Sin:
    return eval_node(n.children[0], X).sin();
  case Op::Cos:
    return eval_node(n.children[0], X).cos();
  }
  throw StructuralError("evaluate: unknown operator");
}

} // namespace

Eigen::VectorXd evaluate(const ExprNode& tree, const Eigen::MatrixXd& inputs) {
  check_arity(tree);
  return eval_node(tree, inputs).matrix();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string_view symbol_kind_name(SymbolKind k) {
  switch (k) {
  case SymbolKind::Binary: return "binary";
  case SymbolKind::Unary: return "unary";
  case SymbolKind::Const: return "const";
  case SymbolKind::Var: return "var";
  }
  throw ParseError("unknown symbol kind");
}

SymbolKind symbol_kind_from_name(std::string_view name) {
  if (name == "binary") return SymbolKind::Binary;
  if (name == "unary") return SymbolKind::Unary;
  if (name == "const") return SymbolKind::Const;
  if (name == "var") return SymbolKind::Var;
  throw ParseError("unknown symbol kind: '" + std::string(name) + "'");
}

std::string format_double(double v) {
  std::array<char, 64> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{})
    throw StructuralError("format_double failed");
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
  if (text.empty())
    throw ParseError("empty numeric token");
  std::string owned(text);
  char* end = nullptr;
  double v = std::strtod(owned.c_str(), &end);
  if (end != owned.c_str() + owned.size())
    throw ParseError("invalid numeric token: '" + owned + "'");
  return v;
}

namespace {

bool is_variable_token(std::string_view text, int& index_out) {
  if (text.size() < 2 || text[0] != 'x')
    return false;
  if (text[1] == '0') // 1-based on disk, no leading zeros
    return false;
  int idx = 0;
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i])))
      return false;
    idx = idx * 10 + (text[i] - '0');
    if (idx > 1'000'000)
      return false;
  }
  index_out = idx - 1;
  return true;
}

void serialize_node(const ExprNode& n, PreorderRecord& out) {
  switch (arity(n.op)) {
  case 2:
    out.push_back({std::string(token_name(n.op)), SymbolKind::Binary});
    break;
  case 1:
    out.push_back({std::string(token_name(n.op)), SymbolKind::Unary});
    break;
  default:
    if (n.op == Op::Var) {
      out.push_back({"x" + std::to_string(n.var_index + 1), SymbolKind::Var});
    } else {
      if (!n.value)
        throw StructuralError("serialize: constant slot has no value");
      out.push_back({format_double(*n.value), SymbolKind::Const});
    }
  }
  for (const auto& c : n.children)
    serialize_node(c, out);
}

ExprNode parse_record(const PreorderRecord& record, std::size_t& pos) {
  if (pos >= record.size())
    throw ParseError("record ended before the tree was complete");
  const PreorderToken& tok = record[pos++];
  switch (tok.kind) {
  case SymbolKind::Binary: {
    auto op = op_from_token(tok.text);
    if (!op || arity(*op) != 2)
      throw ParseError("unknown binary operator: '" + tok.text + "'");
    ExprNode lhs = parse_record(record, pos);
    ExprNode rhs = parse_record(record, pos);
    return ExprNode::binary(*op, std::move(lhs), std::move(rhs));
  }
  case SymbolKind::Unary: {
    auto op = op_from_token(tok.text);
    if (!op || arity(*op) != 1)
      throw ParseError("unknown unary operator: '" + tok.text + "'");
    return ExprNode::unary(*op, parse_record(record, pos));
  }
  case SymbolKind::Var: {
    int idx = -1;
    if (!is_variable_token(tok.text, idx))
      throw ParseError("invalid variable token: '" + tok.text + "'");
    return ExprNode::variable(idx);
  }
  case SymbolKind::Const:
    return ExprNode::constant(parse_double(tok.text));
  }
  throw ParseError("unknown symbol kind");
}

} // namespace

PreorderRecord serialize_preorder(const ExprNode& tree) {
  check_arity(tree);
  PreorderRecord out;
  out.reserve(static_cast<std::size_t>(node_count(tree)));
  serialize_node(tree, out);
  return out;
}

ExprNode deserialize_preorder(const PreorderRecord& record) {
  std::size_t pos = 0;
  ExprNode tree = parse_record(record, pos);
  if (pos != record.size())
    throw ParseError("leftover tokens after the tree was complete");
  return tree;
}

std::string preorder_string(const ExprNode& tree) {
  PreorderRecord record = serialize_preorder(tree);
  std::string out;
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i)
      out += ' ';
    out += record[i].text;
  }
  return out;
}

ExprNode tree_from_preorder_string(std::string_view text) {
  PreorderRecord record;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (start == i)
      break;
    std::string_view tok = text.substr(start, i - start);
    int var_idx = -1;
    if (auto op = op_from_token(tok)) {
      record.push_back({std::string(tok), arity(*op) == 2 ? SymbolKind::Binary
                                                          : SymbolKind::Unary});
    } else if (is_variable_token(tok, var_idx)) {
      record.push_back({std::string(tok), SymbolKind::Var});
    } else {
      parse_double(tok); // throws on garbage
      record.push_back({std::string(tok), SymbolKind::Const});
    }
  }
  if (record.empty())
    throw ParseError("empty expression string");
  return deserialize_preorder(record);
}

namespace {

// Precedence levels for minimal parenthesisation.
int precedence(Op op) {
  switch (op) {
  case Op::Add:
  case Op::Sub:
    return 1;
  case Op::Mul:
  case Op::Div:
    return 2;
  default:
    return 3;
  }
}

void infix_node(const ExprNode& n, std::string& out, int parent_prec, bool rhs) {
  switch (n.op) {
  case Op::Const:
    out += n.value ? format_double(*n.value) : "C";
    return;
  case Op::Var:
    out += "x" + std::to_string(n.var_index + 1);
    return;
  case Op::Inv:
    out += "1/";
    infix_node(n.children[0], out, precedence(Op::Div), true);
    return;
  case Op::Sin:
  case Op::Cos:
    out += std::string(token_name(n.op)) + "(";
    infix_node(n.children[0], out, 0, false);
    out += ")";
    return;
  default:
    break;
  }
  const int prec = precedence(n.op);
  // `rhs` marks the right operand of a non-associative operator (sub, div),
  // where an equal-precedence child still needs parentheses.
  const bool need_parens = prec < parent_prec || (prec == parent_prec && rhs);
  if (need_parens)
    out += "(";
  infix_node(n.children[0], out, prec, false);
  switch (n.op) {
  case Op::Add: out += " + "; break;
  case Op::Sub: out += " - "; break;
  case Op::Mul: out += "*"; break;
  case Op::Div: out += "/"; break;
  default: break;
  }
  infix_node(n.children[1], out, prec, n.op == Op::Sub || n.op == Op::Div);
  if (need_parens)
    out += ")";
}

} // namespace

std::string infix_string(const ExprNode& tree) {
  std::string out;
  infix_node(tree, out, 0, false);
  return out;
}

// ---------------------------------------------------------------------------
// Constant slots
// ---------------------------------------------------------------------------

namespace {

bool slot_is_open(const ExprNode& n) {
  return n.op == Op::Const && n.const_kind != ConstKind::StandAlone;
}

template <typename Node, typename Out>
void collect_open(Node& n, Out& out) {
  if (slot_is_open(n))
    out.push_back(&n);
  for (auto& c : n.children)
    collect_open(c, out);
}

} // namespace

std::vector<ExprNode*> collect_open_constants(ExprNode& tree) {
  std::vector<ExprNode*> out;
  collect_open(tree, out);
  return out;
}

std::vector<const ExprNode*> collect_open_constants(const ExprNode& tree) {
  std::vector<const ExprNode*> out;
  collect_open(tree, out);
  return out;
}

int count_open_constants(const ExprNode& tree) {
  int n = slot_is_open(tree) ? 1 : 0;
  for (const auto& c : tree.children)
    n += count_open_constants(c);
  return n;
}

// ---------------------------------------------------------------------------
// Token sets
// ---------------------------------------------------------------------------

TokenSet TokenSet::from_names(std::span<const std::string> names, int num_vars) {
  if (num_vars < 0)
    throw ConfigError("negative variable count");
  TokenSet ts;
  ts.allow_const = false;
  for (const auto& name : names) {
    if (name == "const") {
      ts.allow_const = true;
      continue;
    }
    auto op = op_from_token(name);
    if (!op)
      throw ConfigError("unknown operator token: '" + name + "'");
    auto& dst = arity(*op) == 2 ? ts.binary_ops : ts.unary_ops;
    if (std::find(dst.begin(), dst.end(), *op) == dst.end())
      dst.push_back(*op);
  }
  ts.variables.resize(num_vars);
  for (int i = 0; i < num_vars; ++i)
    ts.variables[i] = i;
  return ts;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<Op, 4> kEnumOps{Op::Add, Op::Sub, Op::Mul, Op::Div};

void enum_trees(int nodes, int num_vars, int num_ops,
                const std::function<void(const ExprNode&)>& visit) {
  if (nodes == 1) {
    visit(ExprNode::constant(1.0));
    for (int v = 0; v < num_vars; ++v)
      visit(ExprNode::variable(v));
    return;
  }
  for (int left = 1; left <= nodes - 2; left += 2) {
    const int right = nodes - 1 - left;
    for (int o = 0; o < num_ops; ++o) {
      enum_trees(left, num_vars, num_ops, [&](const ExprNode& lhs) {
        enum_trees(right, num_vars, num_ops, [&](const ExprNode& rhs) {
          visit(ExprNode::binary(kEnumOps[o], lhs, rhs));
        });
      });
    }
  }
}

} // namespace

void for_each_tree(int nodes, int num_vars, int num_binary_ops,
                   const std::function<void(const ExprNode&)>& visit) {
  if (nodes < 1 || nodes % 2 == 0)
    throw ConfigError("tree enumeration requires an odd, positive node count");
  if (nodes > 11)
    throw ConfigError("tree enumeration is limited to 11 nodes");
  if (num_vars < 0)
    throw ConfigError("negative variable count");
  if (num_binary_ops < 1 || num_binary_ops > static_cast<int>(kEnumOps.size()))
    throw ConfigError("binary operator count out of range");
  enum_trees(nodes, num_vars, num_binary_ops, visit);
}

std::uint64_t enumerate_trees(int nodes, int num_vars, int num_binary_ops) {
  std::uint64_t count = 0;
  for_each_tree(nodes, num_vars, num_binary_ops,
                [&](const ExprNode&) { ++count; });
  return count;
}

} // namespace vsr
