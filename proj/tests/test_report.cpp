#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>
#include <vsr/report.hpp>

using namespace vsr;

namespace {

RunReport sample_report() {
  RunReport r;
  r.equation_id = "trig/322-7";
  r.algorithm = "vsr-gp";
  r.seed = 12345;
  r.best_expression = "mul c x1";
  r.metrics.mse = 0.5;
  r.metrics.nmse = 0.25;
  r.metrics.rmse = std::sqrt(0.5);
  r.metrics.nrmse = 0.5;
  r.metrics.inv_nmse = 0.8;
  r.metrics.inv_nrmse = 2.0 / 3.0;
  r.metrics.r2 = 0.75;
  r.metrics.valid = true;
  r.recovered = true;
  r.oracle_queries = 123456;
  return r;
}

} // namespace

TEST_CASE("report lines round trip") {
  const RunReport r = sample_report();
  const std::string line = to_json_line(r);
  CHECK(line.find('\n') == std::string::npos);

  const RunReport back = report_from_json_line(line);
  CHECK(back.equation_id == r.equation_id);
  CHECK(back.algorithm == r.algorithm);
  CHECK(back.seed == r.seed);
  CHECK(back.best_expression == r.best_expression);
  CHECK(back.metrics.mse == r.metrics.mse);
  CHECK(back.metrics.r2 == r.metrics.r2);
  CHECK(back.metrics.valid == r.metrics.valid);
  CHECK(back.recovered == r.recovered);
  CHECK_FALSE(back.wall_time_seconds.has_value());
  CHECK(back.oracle_queries == r.oracle_queries);
  CHECK_FALSE(back.error.has_value());

  // serialisation is a fixed point
  CHECK(to_json_line(back) == line);
}

TEST_CASE("timing and error fields are optional") {
  RunReport r = sample_report();
  r.wall_time_seconds = 12.5;
  r.error = "optimizer diverged";
  const RunReport back = report_from_json_line(to_json_line(r));
  REQUIRE(back.wall_time_seconds.has_value());
  CHECK(*back.wall_time_seconds == 12.5);
  REQUIRE(back.error.has_value());
  CHECK(*back.error == "optimizer diverged");
}

TEST_CASE("non-finite metrics map to null and back to sentinels") {
  RunReport r = sample_report();
  r.metrics = invalid_metrics();
  r.recovered = false;
  const std::string line = to_json_line(r);
  CHECK(line.find("inf") == std::string::npos);
  CHECK(line.find("nan") == std::string::npos);
  CHECK(line.find("\"mse\":null") != std::string::npos);

  const RunReport back = report_from_json_line(line);
  CHECK(std::isinf(back.metrics.mse));
  CHECK(back.metrics.mse > 0);
  CHECK(std::isinf(back.metrics.r2));
  CHECK(back.metrics.r2 < 0);
  CHECK(back.metrics.inv_nmse == 0.0);
  CHECK_FALSE(back.metrics.valid);
}

TEST_CASE("key order is stable") {
  const std::string line = to_json_line(sample_report());
  const std::vector<std::string> keys = {
      "\"equation_id\"", "\"algorithm\"",  "\"seed\"",
      "\"best_expression\"", "\"metrics\"", "\"recovered\"",
      "\"wall_time_seconds\"", "\"oracle_queries\"", "\"error\""};
  std::size_t pos = 0;
  for (const auto& key : keys) {
    const std::size_t at = line.find(key, pos);
    REQUIRE(at != std::string::npos);
    pos = at;
  }
}

TEST_CASE("malformed lines are rejected") {
  CHECK_THROWS_AS(report_from_json_line("{not json"), ParseError);
  CHECK_THROWS(report_from_json_line("{\"equation_id\": \"x\"}"));
}

TEST_CASE("the shipped schema parses and mirrors the writer") {
  const nlohmann::json schema = nlohmann::json::parse(run_report_schema());
  CHECK(schema.at("type") == "object");
  CHECK(schema.at("additionalProperties") == false);

  const auto& props = schema.at("properties");
  const nlohmann::json line = nlohmann::json::parse(
      to_json_line(sample_report()));
  // every emitted key is declared, every declared key is emitted
  for (const auto& [key, value] : line.items())
    CHECK(props.contains(key));
  for (const auto& [key, value] : props.items())
    CHECK(line.contains(key));
  for (const auto& req : schema.at("required"))
    CHECK(line.contains(req.get<std::string>()));

  const auto algos = props.at("algorithm").at("enum");
  CHECK(algos.size() == 4);
}

TEST_CASE("the published schema file matches the library") {
  std::ifstream in(std::string(VSR_SOURCE_DIR) + "/docs/run_report.schema.json",
                   std::ios::binary);
  REQUIRE(in.good());
  std::stringstream file;
  file << in.rdbuf();
  CHECK(file.str() == run_report_schema());
}
