#include <doctest.h>

#include <cmath>
#include <set>

#include <vsr/oracle.hpp>

using namespace vsr;

namespace {

EquationSpec product_difference_spec() {
  // x1*x3 - x2*x4 on (0,1)^4
  EquationSpec spec;
  spec.num_vars = 4;
  spec.var_domains.assign(4, {0.0, 1.0});
  spec.function_set = {"add", "sub", "mul", "div", "const"};
  const ExprNode tree = ExprNode::binary(
      Op::Sub,
      ExprNode::binary(Op::Mul, ExprNode::variable(0), ExprNode::variable(2)),
      ExprNode::binary(Op::Mul, ExprNode::variable(1), ExprNode::variable(3)));
  spec.equation = serialize_preorder(tree);
  return spec;
}

} // namespace

TEST_CASE("spec validation catches inconsistencies") {
  EquationSpec ok = product_difference_spec();
  CHECK_NOTHROW(validate(ok));

  EquationSpec bad = ok;
  bad.var_domains[1] = {2.0, 2.0};
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = ok;
  bad.function_set = {"add", "sub", "const"}; // equation uses mul
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = ok;
  bad.function_set.push_back("exp");
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = ok;
  bad.num_vars = 3; // equation references x4
  bad.var_domains.resize(3);
  CHECK_THROWS_AS(validate(bad), SchemaError);

  bad = ok;
  bad.equation.pop_back(); // arity broken
  CHECK_THROWS_AS(validate(bad), ParseError);
}

TEST_CASE("control spec construction") {
  const ControlSpec cs = ControlSpec::controlling(4, {2, 1});
  CHECK(cs.controlled == std::vector<int>{1, 2});
  CHECK(cs.free_vars == std::vector<int>{0, 3});
  CHECK(cs.num_vars() == 4);

  const ControlSpec all = ControlSpec::all_free(3);
  CHECK(all.controlled.empty());
  CHECK(all.free_vars == std::vector<int>{0, 1, 2});

  CHECK_THROWS_AS(ControlSpec::controlling(4, {1, 1}), ConfigError);
  CHECK_THROWS_AS(ControlSpec::controlling(4, {4}), ConfigError);

  ControlSpec incomplete;
  incomplete.controlled = {0};
  incomplete.free_vars = {1};
  CHECK_THROWS_AS(incomplete.validate(3), ConfigError);
}

TEST_CASE("noiseless oracle equals direct evaluation") {
  Oracle oracle(product_difference_spec(), {0.0, 9});
  Eigen::MatrixXd X(3, 4);
  X << 0.5, 0.1, 0.7, 0.3,
       1.0, 1.0, 1.0, 1.0,
       0.2, 0.9, 0.4, 0.6;
  const Eigen::VectorXd y = oracle.evaluate(X);
  CHECK(y[0] == doctest::Approx(0.5 * 0.7 - 0.1 * 0.3));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(0.2 * 0.4 - 0.9 * 0.6));
  CHECK(oracle.num_vars() == 4);
  CHECK(oracle.function_set() ==
        std::vector<std::string>{"add", "sub", "mul", "div", "const"});
}

TEST_CASE("oracle rejects wrongly shaped queries") {
  Oracle oracle(product_difference_spec(), {0.0, 9});
  Eigen::MatrixXd X(2, 3);
  X.setConstant(0.5);
  CHECK_THROWS_AS(oracle.evaluate(X), ConfigError);
}

TEST_CASE("gaussian noise has the configured scale") {
  Oracle oracle(product_difference_spec(), {0.1, 77});
  Eigen::MatrixXd X(1, 4);
  X << 0.5, 0.5, 0.5, 0.5;
  const double truth = 0.5 * 0.5 - 0.5 * 0.5;

  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = oracle.evaluate(X)[0];
    sum += y - truth;
    sq += (y - truth) * (y - truth);
  }
  const double mean = sum / n;
  const double std_dev = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.01);
  CHECK(std_dev == doctest::Approx(0.1).epsilon(0.1));
  CHECK(std::abs(std_dev - 0.1) < 0.01);
}

TEST_CASE("negative sigma is rejected") {
  CHECK_THROWS_AS(Oracle(product_difference_spec(), {-0.5, 0}), ConfigError);
}

TEST_CASE("controlled variables are constant within a trial") {
  Oracle oracle(product_difference_spec(), {0.0, 5});
  const ControlSpec control = ControlSpec::controlling(4, {1, 2, 3});
  const Oracle::Trial trial = oracle.sample_trial(control, 64);

  REQUIRE(trial.inputs.rows() == 64);
  REQUIRE(trial.controlled_values.size() == 3);
  for (const auto& [v, value] : trial.controlled_values) {
    CHECK((trial.inputs.col(v).array() == value).all());
    CHECK(value >= 0.0);
    CHECK(value < 1.0);
  }
  // the free column actually varies
  CHECK(trial.inputs.col(0).maxCoeff() > trial.inputs.col(0).minCoeff());
  // outputs match the hidden expression
  for (int i = 0; i < 5; ++i) {
    const double want = trial.inputs(i, 0) * trial.inputs(i, 2) -
                        trial.inputs(i, 1) * trial.inputs(i, 3);
    CHECK(trial.outputs[i] == doctest::Approx(want));
  }
}

TEST_CASE("controlled values vary between trials") {
  Oracle oracle(product_difference_spec(), {0.0, 5});
  const ControlSpec control = ControlSpec::controlling(4, {1, 2, 3});
  std::set<long long> seen;
  for (int k = 0; k < 8; ++k) {
    const Oracle::Trial t = oracle.sample_trial(control, 4);
    seen.insert(llround(t.controlled_values[0].second * 1e12));
  }
  CHECK(seen.size() == 8);
}

TEST_CASE("pinned trials reproduce requested controls") {
  Oracle oracle(product_difference_spec(), {0.0, 5});
  const ControlSpec control = ControlSpec::controlling(4, {1, 2, 3});
  const std::vector<std::pair<int, double>> pinned{
      {1, 0.5}, {2, 0.1}, {3, 0.7}};
  const Oracle::Trial t = oracle.sample_trial_at(control, pinned, 16);
  CHECK((t.inputs.col(1).array() == 0.5).all());
  CHECK((t.inputs.col(2).array() == 0.1).all());
  CHECK((t.inputs.col(3).array() == 0.7).all());

  const std::vector<std::pair<int, double>> wrong{{0, 0.5}};
  CHECK_THROWS_AS(oracle.sample_trial_at(control, wrong, 4), ConfigError);
  CHECK_THROWS_AS(oracle.sample_trial(control, 0), ConfigError);
}

TEST_CASE("query counters") {
  Oracle oracle(product_difference_spec(), {0.0, 5});
  CHECK(oracle.query_calls() == 0);
  CHECK(oracle.query_rows() == 0);
  Eigen::MatrixXd X(7, 4);
  X.setConstant(0.5);
  oracle.evaluate(X);
  CHECK(oracle.query_calls() == 1);
  CHECK(oracle.query_rows() == 7);
  oracle.sample_trial(ControlSpec::all_free(4), 32);
  CHECK(oracle.query_calls() == 2);
  CHECK(oracle.query_rows() == 39);
}

TEST_CASE("same seed gives bit-identical sample streams") {
  const EquationSpec spec = product_difference_spec();
  Oracle a(spec, {0.1, 1234});
  Oracle b(spec, {0.1, 1234});
  const ControlSpec control = ControlSpec::controlling(4, {2, 3});
  const Oracle::Trial ta = a.sample_trial(control, 32);
  const Oracle::Trial tb = b.sample_trial(control, 32);
  CHECK(ta.inputs == tb.inputs);
  CHECK(ta.outputs == tb.outputs);
}

TEST_CASE("forked oracles draw distinct streams") {
  const EquationSpec spec = product_difference_spec();
  Oracle a(spec, {0.0, 1234});
  Oracle test_stream = a.fork(1);
  CHECK(test_stream.query_rows() == 0);
  const Oracle::Trial ta = a.sample_trial(ControlSpec::all_free(4), 16);
  const Oracle::Trial tb = test_stream.sample_trial(ControlSpec::all_free(4), 16);
  CHECK(ta.inputs != tb.inputs);
  // forks are themselves reproducible
  Oracle again = Oracle(spec, {0.0, 1234}).fork(1);
  const Oracle::Trial tc = again.sample_trial(ControlSpec::all_free(4), 16);
  CHECK(tb.inputs == tc.inputs);
}
