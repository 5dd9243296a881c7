#include "confstat/report.hpp"

#include <cstdio>
#include <fstream>

#include "confstat/errors.hpp"
#include "confstat/version.hpp"

namespace confstat {

std::string AnalysisReport::csv_text() const {
  std::string out;
  for (std::size_t i = 0; i < csv_header.size(); ++i) {
    out += csv_header[i];
    out += (i + 1 < csv_header.size()) ? ',' : '\n';
  }
  char buf[32];
  for (const auto& row : csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out += buf;
      out += (i + 1 < row.size()) ? ',' : '\n';
    }
  }
  return out;
}

void AnalysisReport::write(const std::string& base) const {
  {
    std::ofstream f(base + ".json");
    if (!f) throw Error("cannot write report file " + base + ".json");
    f << doc.dump(2) << "\n";
  }
  if (!csv_rows.empty()) {
    std::ofstream f(base + ".csv");
    if (!f) throw Error("cannot write report file " + base + ".csv");
    f << csv_text();
  }
}

nlohmann::json report_envelope(const std::string& command, const nlohmann::json& config_echo,
                               const nlohmann::json& tolerances) {
  nlohmann::json j;
  j["tool"] = {{"name", kToolName}, {"version", kVersion}};
  j["report_schema_version"] = kReportSchemaVersion;
  j["command"] = command;
  j["config"] = config_echo;
  j["tolerances"] = tolerances;
  return j;
}

}  // namespace confstat
