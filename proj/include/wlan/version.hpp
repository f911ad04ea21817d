#pragma once

namespace wlan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wlan
