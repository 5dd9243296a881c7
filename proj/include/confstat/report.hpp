#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace confstat {

// Machine-readable JSON document plus a per-event CSV table and a plain-text
// summary. Every verdict in the JSON carries the numeric evidence and the
// thresholds that produced it.
struct AnalysisReport {
  nlohmann::json doc;
  std::string summary;
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;

  std::string csv_text() const;
  // Writes <base>.json and, when a table is present, <base>.csv.
  void write(const std::string& base) const;
};

nlohmann::json report_envelope(const std::string& command, const nlohmann::json& config_echo,
                               const nlohmann::json& tolerances);

}  // namespace confstat
