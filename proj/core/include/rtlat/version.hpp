#pragma once

namespace rtlat {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr unsigned kSampleFormatVersion = 1;
inline constexpr unsigned kCsvSchemaVersion = 1;

}  // namespace rtlat
