#pragma once

namespace dart {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dart
