#pragma once

namespace finsler {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kReportVersion = 1;

}  // namespace finsler
