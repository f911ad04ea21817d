#pragma once

#include <string>
#include <vector>

namespace wlan {

/// "%.12g" — the one float format every emitted file uses.
std::string g12(double v);

std::string join_csv(const std::vector<std::string>& cells);

}  // namespace wlan
