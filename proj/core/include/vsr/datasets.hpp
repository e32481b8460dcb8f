#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vsr/oracle.hpp"

namespace vsr {

/// Recipe for one synthetic ground-truth expression:
/// a constant offset, `singular_terms` coefficient-scaled single-variable
/// terms and `pairwise_terms` coefficient-scaled two-factor products, over
/// `variables` input variables and the operators in `op_set`.
struct TrigConfig {
  int variables = 1;      // l1
  int singular_terms = 0; // l2
  int pairwise_terms = 0; // l3
  std::vector<std::string> op_set;
  std::uint64_t seed = 0;
};

/// Deterministically generate an equation matching the recipe. Coefficients
/// are uniform [-1, 1] rounded to 3 decimals; input domains are (-5, 5), or
/// (0.1, 5) when the operator set contains `inv`, to keep the data away from
/// poles.
EquationSpec gen_trig_expression(const TrigConfig& config);

/// Parse an equation file. The reader also accepts the Python-flavoured
/// variant of the format (single-quoted strings, tuples for pairs); the
/// writer always emits canonical JSON.
EquationSpec equation_from_text(std::string_view text);
EquationSpec load_equation(const std::filesystem::path& path);

std::string equation_to_text(const EquationSpec& spec);
void save_equation(const EquationSpec& spec,
                   const std::filesystem::path& path);

} // namespace vsr
