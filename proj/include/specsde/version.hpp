#pragma once

namespace specsde {
inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCsvFormat = "specsde-csv v1";
}  // namespace specsde
