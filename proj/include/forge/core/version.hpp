#pragma once

namespace forge {

inline constexpr const char* kToolName = "forge";
inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace forge
