#include "wlan/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wlan {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": not a number: '" + s + "'");
  }
  if (pos != s.size())
    throw std::invalid_argument(what + ": trailing junk in '" + s + "'");
  return v;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text, const std::string& name) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                  ": empty key");
    out[key] = value;
  }
  return out;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw std::invalid_argument("key '" + key + "': empty list element");
    out.push_back(parse_double(item, "key '" + key + "'"));
  }
  if (out.empty())
    throw std::invalid_argument("key '" + key + "': empty list");
  return out;
}

namespace {

const std::string& require_key(const ConfigMap& cfg, const std::string& key) {
  auto it = cfg.find(key);
  if (it == cfg.end())
    throw std::invalid_argument("config is missing required key '" + key + "'");
  return it->second;
}

std::vector<double> fan_out(std::vector<double> v, std::size_t n,
                            const std::string& key) {
  if (v.size() == 1 && n > 1) v.assign(n, v[0]);
  if (v.size() != n)
    throw std::invalid_argument("key '" + key + "': expected 1 or n values");
  return v;
}

}  // namespace

WlanParams wlan_params_from_config(const ConfigMap& cfg) {
  const std::string& n_str = require_key(cfg, "n");
  std::size_t pos = 0;
  int n = 0;
  try {
    n = std::stoi(n_str, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("key 'n': not an integer: '" + n_str + "'");
  }
  if (pos != n_str.size() || n < 1)
    throw std::invalid_argument("key 'n': must be a positive integer");

  double sigma = parse_double(require_key(cfg, "sigma"), "key 'sigma'");
  double t_s = parse_double(require_key(cfg, "t_s"), "key 't_s'");
  double t_c = parse_double(require_key(cfg, "t_c"), "key 't_c'");
  auto payloads = fan_out(
      parse_double_list(require_key(cfg, "payloads"), "payloads"),
      static_cast<std::size_t>(n), "payloads");
  std::vector<double> tau_bar(static_cast<std::size_t>(n), 1.0);
  if (auto it = cfg.find("tau_bar"); it != cfg.end())
    tau_bar = fan_out(parse_double_list(it->second, "tau_bar"),
                      static_cast<std::size_t>(n), "tau_bar");
  return WlanParams(n, sigma, t_s, t_c, std::move(payloads),
                    std::move(tau_bar));
}

}  // namespace wlan
