#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "vsr/metrics.hpp"

namespace vsr {

/// One benchmark result row, serialized as a single JSON line.
/// wall_time_seconds is optional: populated only when timing was requested,
/// because timestamps would break byte-for-byte reproducibility of report
/// files produced with identical flags.
struct RunReport {
  std::string equation_id;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string best_expression; // pre-order token string, empty on failure
  MetricReport metrics;
  bool recovered = false;
  std::optional<double> wall_time_seconds;
  std::uint64_t oracle_queries = 0; // data rows drawn during training
  std::optional<std::string> error;
};

std::string to_json_line(const RunReport& report);
RunReport report_from_json_line(const std::string& line);

/// JSON schema describing one report line (also shipped as
/// docs/run_report.schema.json).
std::string run_report_schema();

} // namespace vsr
