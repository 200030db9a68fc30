#pragma once

#include <string_view>

namespace repoloc {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Bumped whenever a persisted artifact layout changes; readers reject
// anything they were not built for.
inline constexpr int kIndexCacheFormatVersion = 1;
inline constexpr int kDatasetSchemaVersion = 1;
inline constexpr int kTrajectorySchemaVersion = 1;

} // namespace repoloc
