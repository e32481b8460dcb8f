#include "vsr/datasets.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vsr/rng.hpp"

namespace vsr {

namespace {

using ordered_json = nlohmann::ordered_json;

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

// A term factor: a variable, possibly behind a unary wrapper.
struct Factor {
  std::optional<Op> wrapper;
  int var = 0;

  ExprNode build() const {
    ExprNode leaf = ExprNode::variable(var);
    return wrapper ? ExprNode::unary(*wrapper, std::move(leaf))
                   : std::move(leaf);
  }
  long key(int num_wrappers) const {
    const int w = wrapper ? 1 + static_cast<int>(*wrapper) : 0;
    return static_cast<long>(var) * (num_wrappers + 8) + w;
  }
};

} // namespace

EquationSpec gen_trig_expression(const TrigConfig& config) {
  if (config.variables < 1)
    throw ConfigError("gen_trig_expression: need at least one variable");
  if (config.singular_terms < 0 || config.pairwise_terms < 0)
    throw ConfigError("gen_trig_expression: negative term count");

  TokenSet tokens = TokenSet::from_names(config.op_set, config.variables);
  const bool has_mul = std::find(tokens.binary_ops.begin(),
                                 tokens.binary_ops.end(),
                                 Op::Mul) != tokens.binary_ops.end();
  const bool has_add_or_sub =
      std::find(tokens.binary_ops.begin(), tokens.binary_ops.end(), Op::Add) !=
          tokens.binary_ops.end() ||
      std::find(tokens.binary_ops.begin(), tokens.binary_ops.end(), Op::Sub) !=
          tokens.binary_ops.end();
  if ((config.singular_terms > 0 || config.pairwise_terms > 0) &&
      (!has_mul || !has_add_or_sub))
    throw ConfigError(
        "gen_trig_expression: op_set must contain mul and add or sub");

  Rng rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> pick_var(0, config.variables - 1);
  // factor wrappers: plain variable plus each unary operator available
  std::uniform_int_distribution<int> pick_wrap(
      0, static_cast<int>(tokens.unary_ops.size()));

  auto coefficient = [&]() {
    double c = 0.0;
    do {
      c = round3(unit(rng));
    } while (std::abs(c) < 0.005); // a zero coefficient would drop the term
    return c;
  };
  auto factor = [&]() {
    Factor f;
    f.var = pick_var(rng);
    const int w = pick_wrap(rng);
    if (w > 0)
      f.wrapper = tokens.unary_ops[w - 1];
    return f;
  };

  const int wrapper_count = static_cast<int>(tokens.unary_ops.size()) + 1;
  std::set<long> used_singular;
  std::set<std::pair<long, long>> used_pairwise;

  ExprNode expr = ExprNode::constant(coefficient()); // the offset

  for (int t = 0; t < config.singular_terms; ++t) {
    Factor f = factor();
    for (int attempt = 0; attempt < 64 && used_singular.count(f.key(wrapper_count));
         ++attempt)
      f = factor();
    used_singular.insert(f.key(wrapper_count));
    ExprNode term = ExprNode::binary(Op::Mul, ExprNode::constant(coefficient()),
                                     f.build());
    expr = ExprNode::binary(Op::Add, std::move(expr), std::move(term));
  }

  for (int t = 0; t < config.pairwise_terms; ++t) {
    Factor a, b;
    for (int attempt = 0; attempt < 64; ++attempt) {
      a = factor();
      b = factor();
      // x*inv(x) folds to 1 and would alias the offset
      const bool cancels =
          a.var == b.var &&
          ((!a.wrapper && b.wrapper == Op::Inv) ||
           (!b.wrapper && a.wrapper == Op::Inv));
      auto key = std::minmax(a.key(wrapper_count), b.key(wrapper_count));
      if (!cancels && !used_pairwise.count(key))
        break;
    }
    used_pairwise.insert(
        std::minmax(a.key(wrapper_count), b.key(wrapper_count)));
    ExprNode product = ExprNode::binary(Op::Mul, a.build(), b.build());
    ExprNode term = ExprNode::binary(Op::Mul, ExprNode::constant(coefficient()),
                                     std::move(product));
    expr = ExprNode::binary(Op::Add, std::move(expr), std::move(term));
  }

  EquationSpec spec;
  spec.num_vars = config.variables;
  const bool has_inv = std::find(tokens.unary_ops.begin(),
                                 tokens.unary_ops.end(),
                                 Op::Inv) != tokens.unary_ops.end();
  const std::array<double, 2> domain =
      has_inv ? std::array<double, 2>{0.1, 5.0}
              : std::array<double, 2>{-5.0, 5.0};
  spec.var_domains.assign(config.variables, domain);
  spec.function_set = config.op_set;
  if (std::find(spec.function_set.begin(), spec.function_set.end(),
                "const") == spec.function_set.end())
    spec.function_set.push_back("const");
  spec.equation = serialize_preorder(expr);
  validate(spec);
  return spec;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

namespace {

// Accept the Python-literal flavour of the format: single-quoted strings and
// round-bracket tuples. Rewrites to strict JSON outside of string literals.
std::string python_literals_to_json(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote) {
      if (c == '\\' && i + 1 < text.size()) {
        out += c;
        out += text[++i];
        continue;
      }
      if (c == quote) {
        out += '"';
        quote = 0;
      } else if (c == '"') {
        out += "\\\"";
      } else {
        out += c;
      }
      continue;
    }
    switch (c) {
    case '\'':
    case '"':
      quote = c;
      out += '"';
      break;
    case '(':
      out += '[';
      break;
    case ')':
      out += ']';
      break;
    default:
      out += c;
    }
  }
  return out;
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw SchemaError("equation file: key '" + key + "' " + why);
}

} // namespace

EquationSpec equation_from_text(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(python_literals_to_json(text));
  } catch (const std::exception& e) {
    throw SchemaError(std::string("equation file: not parseable: ") + e.what());
  }
  if (!j.is_object())
    throw SchemaError("equation file: top level must be an object");

  EquationSpec spec;
  if (!j.contains("num_vars") || !j["num_vars"].is_number_integer())
    bad_key("num_vars", "missing or not an integer");
  spec.num_vars = j["num_vars"].get<int>();

  if (!j.contains("var_domains") || !j["var_domains"].is_array())
    bad_key("var_domains", "missing or not an array");
  for (const auto& d : j["var_domains"]) {
    if (!d.is_array() || d.size() != 2 || !d[0].is_number() ||
        !d[1].is_number())
      bad_key("var_domains", "entries must be [low, high] number pairs");
    spec.var_domains.push_back({d[0].get<double>(), d[1].get<double>()});
  }

  if (!j.contains("function_set") || !j["function_set"].is_array())
    bad_key("function_set", "missing or not an array");
  for (const auto& f : j["function_set"]) {
    if (!f.is_string())
      bad_key("function_set", "entries must be strings");
    spec.function_set.push_back(f.get<std::string>());
  }

  if (!j.contains("equation") || !j["equation"].is_array())
    bad_key("equation", "missing or not an array");
  for (const auto& t : j["equation"]) {
    if (!t.is_array() || t.size() != 2 || !t[0].is_string() ||
        !t[1].is_string())
      bad_key("equation", "entries must be [token, kind] string pairs");
    PreorderToken tok;
    tok.text = t[0].get<std::string>();
    try {
      tok.kind = symbol_kind_from_name(t[1].get<std::string>());
    } catch (const ParseError& e) {
      bad_key("equation", e.what());
    }
    spec.equation.push_back(std::move(tok));
  }

  try {
    validate(spec);
  } catch (const ParseError& e) {
    bad_key("equation", e.what());
  }
  return spec;
}

EquationSpec load_equation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw SchemaError("equation file: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return equation_from_text(buf.str());
}

std::string equation_to_text(const EquationSpec& spec) {
  validate(spec);
  ordered_json j;
  j["num_vars"] = spec.num_vars;
  j["var_domains"] = ordered_json::array();
  for (const auto& d : spec.var_domains)
    j["var_domains"].push_back({d[0], d[1]});
  j["function_set"] = spec.function_set;
  j["equation"] = ordered_json::array();
  for (const auto& tok : spec.equation)
    j["equation"].push_back({tok.text, std::string(symbol_kind_name(tok.kind))});
  return j.dump(2) + "\n";
}

void save_equation(const EquationSpec& spec,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw SchemaError("equation file: cannot write '" + path.string() + "'");
  out << equation_to_text(spec);
}

} // namespace vsr
