#pragma once

namespace pareidolia {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pareidolia
