#include "vsr/report.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

using ordered_json = nlohmann::ordered_json;

// JSON has no Inf/NaN; broken-candidate sentinels are mapped to null.
ordered_json number_or_null(double v) {
  if (std::isfinite(v))
    return v;
  return nullptr;
}

double null_to_sentinel(const ordered_json& j, double sentinel) {
  if (j.is_null())
    return sentinel;
  return j.get<double>();
}

} // namespace

std::string to_json_line(const RunReport& report) {
  ordered_json j;
  j["equation_id"] = report.equation_id;
  j["algorithm"] = report.algorithm;
  j["seed"] = report.seed;
  j["best_expression"] = report.best_expression;
  ordered_json m;
  m["mse"] = number_or_null(report.metrics.mse);
  m["nmse"] = number_or_null(report.metrics.nmse);
  m["rmse"] = number_or_null(report.metrics.rmse);
  m["nrmse"] = number_or_null(report.metrics.nrmse);
  m["inv_nmse"] = number_or_null(report.metrics.inv_nmse);
  m["inv_nrmse"] = number_or_null(report.metrics.inv_nrmse);
  m["r2"] = number_or_null(report.metrics.r2);
  m["valid"] = report.metrics.valid;
  j["metrics"] = std::move(m);
  j["recovered"] = report.recovered;
  j["wall_time_seconds"] = report.wall_time_seconds
                               ? ordered_json(*report.wall_time_seconds)
                               : ordered_json(nullptr);
  j["oracle_queries"] = report.oracle_queries;
  j["error"] = report.error ? ordered_json(*report.error)
                            : ordered_json(nullptr);
  return j.dump();
}

RunReport report_from_json_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const std::exception& e) {
    throw ParseError(std::string("report line: ") + e.what());
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  RunReport r;
  r.equation_id = j.at("equation_id").get<std::string>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.best_expression = j.at("best_expression").get<std::string>();
  const auto& m = j.at("metrics");
  r.metrics.mse = null_to_sentinel(m.at("mse"), kInf);
  r.metrics.nmse = null_to_sentinel(m.at("nmse"), kInf);
  r.metrics.rmse = null_to_sentinel(m.at("rmse"), kInf);
  r.metrics.nrmse = null_to_sentinel(m.at("nrmse"), kInf);
  r.metrics.inv_nmse = null_to_sentinel(m.at("inv_nmse"), 0.0);
  r.metrics.inv_nrmse = null_to_sentinel(m.at("inv_nrmse"), 0.0);
  r.metrics.r2 = null_to_sentinel(m.at("r2"), -kInf);
  r.metrics.valid = m.at("valid").get<bool>();
  r.recovered = j.at("recovered").get<bool>();
  if (!j.at("wall_time_seconds").is_null())
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  r.oracle_queries = j.at("oracle_queries").get<std::uint64_t>();
  if (!j.at("error").is_null())
    r.error = j.at("error").get<std::string>();
  return r;
}

std::string run_report_schema() {
  static const char* kSchema = R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "run_report_line",
  "type": "object",
  "required": ["equation_id", "algorithm", "seed", "best_expression",
               "metrics", "recovered", "wall_time_seconds", "oracle_queries",
               "error"],
  "additionalProperties": false,
  "properties": {
    "equation_id": {"type": "string"},
    "algorithm": {"type": "string",
                  "enum": ["gp", "vsr-gp", "mcts", "vsr-mcts"]},
    "seed": {"type": "integer", "minimum": 0},
    "best_expression": {"type": "string"},
    "metrics": {
      "type": "object",
      "required": ["mse", "nmse", "rmse", "nrmse", "inv_nmse", "inv_nrmse",
                   "r2", "valid"],
      "additionalProperties": false,
      "properties": {
        "mse": {"type": ["number", "null"]},
        "nmse": {"type": ["number", "null"]},
        "rmse": {"type": ["number", "null"]},
        "nrmse": {"type": ["number", "null"]},
        "inv_nmse": {"type": ["number", "null"]},
        "inv_nrmse": {"type": ["number", "null"]},
        "r2": {"type": ["number", "null"]},
        "valid": {"type": "boolean"}
      }
    },
    "recovered": {"type": "boolean"},
    "wall_time_seconds": {"type": ["number", "null"]},
    "oracle_queries": {"type": "integer", "minimum": 0},
    "error": {"type": ["string", "null"]}
  }
}
)";
  return kSchema;
}

} // namespace vsr
