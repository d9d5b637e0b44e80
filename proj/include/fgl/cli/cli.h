#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fgl/engine/config.h"
#include "fgl/engine/experiment.h"
#include "fgl/stats/stats.h"

namespace fgl {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json StatsToJson(const HeterogeneityReport& stats);

// Full run report: config echo, data summary, per-repeat rounds, summary,
// communication totals, DP report, version and timestamp.
nlohmann::json ReportToJson(const ExperimentConfig& cfg, const FederatedData& data,
                            const RunReport& report);

// Copy of a report without the fields that vary between identical runs
// ("timestamp" and "wall_ms", at any depth).
nlohmann::json StripVolatile(const nlohmann::json& report);

// One CSV row per report sorted by mean metric (best first); aborted runs
// last and marked ABORTED. Throws kComparison when the metrics differ.
std::string ReportTable(const std::vector<nlohmann::json>& reports);

// Entry point of the fgl command line: partition | stats | run | report.
// Errors print "error_code=<NAME>" and the message on `err`; the return
// value is the process exit status.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fgl
