#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vsr/expr.hpp"
#include "vsr/rng.hpp"

namespace vsr {

/// On-disk description of a ground-truth equation: how many inputs it takes,
/// where each input lives, which operator tokens it uses and the expression
/// itself in extended pre-order form.
struct EquationSpec {
  int num_vars = 0;
  std::vector<std::array<double, 2>> var_domains; // [low, high) per variable
  std::vector<std::string> function_set;
  PreorderRecord equation;
};

/// Throws SchemaError when the spec is internally inconsistent: domain count
/// mismatch, low >= high, operator tokens outside function_set, or variable
/// references >= num_vars.
void validate(const EquationSpec& spec);

struct OracleConfig {
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Partition of the input variables into controlled (held constant within a
/// trial) and free (drawn per sample) sets.
struct ControlSpec {
  std::vector<int> controlled; // sorted, 0-based
  std::vector<int> free_vars;  // sorted, 0-based

  static ControlSpec controlling(int num_vars, std::vector<int> controlled);
  static ControlSpec all_free(int num_vars);
  int num_vars() const {
    return static_cast<int>(controlled.size() + free_vars.size());
  }
  void validate(int num_vars) const; // disjoint, complete, in range
};

/// Owns a hidden ground-truth expression and answers data queries about it.
/// Every query is counted; with noise_sigma > 0, independent Gaussian noise
/// is added to each output.
class Oracle {
public:
  Oracle(EquationSpec spec, OracleConfig cfg);

  int num_vars() const { return spec_.num_vars; }
  const std::vector<std::string>& function_set() const {
    return spec_.function_set;
  }
  const EquationSpec& spec() const { return spec_; }
  const ExprNode& ground_truth() const { return tree_; }
  double noise_sigma() const { return cfg_.noise_sigma; }

  /// Evaluate the hidden expression on caller-supplied inputs (one row per
  /// sample, num_vars columns). Counts as one query of X.rows() rows.
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& inputs);

  struct Trial {
    Eigen::MatrixXd inputs;
    Eigen::VectorXd outputs;
    std::vector<std::pair<int, double>> controlled_values;
  };

  /// Draw one controlled experiment: each controlled variable gets a single
  /// uniform draw from its domain, shared by the whole batch; free variables
  /// are drawn i.i.d. uniform per sample.
  Trial sample_trial(const ControlSpec& control, int batch_size);

  /// Same, but with caller-pinned values for the controlled variables.
  Trial sample_trial_at(const ControlSpec& control,
                        std::span<const std::pair<int, double>> pinned,
                        int batch_size);

  std::uint64_t query_calls() const { return calls_; }
  std::uint64_t query_rows() const { return rows_; }

  /// Independent oracle over the same equation: derived seed, fresh counters.
  /// Used to draw held-out data that shares nothing with the training stream.
  Oracle fork(std::uint64_t stream) const;

private:
  EquationSpec spec_;
  OracleConfig cfg_;
  ExprNode tree_;
  Rng rng_;
  std::uint64_t calls_ = 0;
  std::uint64_t rows_ = 0;
};

} // namespace vsr
