#pragma once

#include "confstat/config.hpp"
#include "confstat/report.hpp"

namespace confstat {

AnalysisReport cmd_analyze(const RunConfig& config);
AnalysisReport cmd_trace(const RunConfig& config);
AnalysisReport cmd_parallax(const RunConfig& config);
AnalysisReport cmd_causality(const RunConfig& config);
AnalysisReport cmd_potential(const RunConfig& config);

// Dispatch on config.command.
AnalysisReport run_command(const RunConfig& config);

}  // namespace confstat
