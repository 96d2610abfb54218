#pragma once

#include <string_view>

namespace detfuse {

inline constexpr std::string_view kToolName = "detfuse";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace detfuse
