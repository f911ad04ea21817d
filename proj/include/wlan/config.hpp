#pragma once

#include <map>
#include <string>
#include <vector>

#include "wlan/model.hpp"

namespace wlan {

// Flat key=value config text.  '#' starts a comment, blank lines are
// ignored, later keys win.  Parse errors carry "<name>:<line>:".
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text, const std::string& name);
ConfigMap parse_config_file(const std::string& path);

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& key);

// Keys: n, sigma, t_s, t_c, payloads (comma-separated), tau_bar
// (comma-separated, defaults to all-1).  Single-element lists fan out to n.
WlanParams wlan_params_from_config(const ConfigMap& cfg);

}  // namespace wlan
