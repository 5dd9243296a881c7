#pragma once

namespace confstat {

inline constexpr const char* kToolName = "confstat";
inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

}  // namespace confstat
