/*
 *    Copyright 2026 The wpsim Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "wpsim/kvconfig.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace wpsim {

namespace {

std::string trim(const std::string& s)
{
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace

KvConfig KvConfig::parse_text(const std::string& text, const std::string& origin)
{
  KvConfig cfg;
  cfg.origin_ = origin;

  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.kv_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.kv_[key] = val;
  }
  return cfg;
}

KvConfig KvConfig::parse_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

std::string KvConfig::take(const std::string& key, bool& found)
{
  auto it = kv_.find(key);
  if (it == kv_.end()) {
    found = false;
    return {};
  }
  found = true;
  std::string v = it->second;
  kv_.erase(it);
  return v;
}

std::string KvConfig::get_string(const std::string& key, const std::string& def)
{
  bool found = false;
  std::string v = take(key, found);
  return found ? v : def;
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t def)
{
  bool found = false;
  std::string v = take(key, found);
  if (!found)
    return def;
  try {
    size_t pos = 0;
    uint64_t r = std::stoull(v, &pos, 0);
    if (pos != v.size())
      throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "': bad unsigned integer '" + v + "'");
  }
}

int64_t KvConfig::get_i64(const std::string& key, int64_t def)
{
  bool found = false;
  std::string v = take(key, found);
  if (!found)
    return def;
  try {
    size_t pos = 0;
    int64_t r = std::stoll(v, &pos, 0);
    if (pos != v.size())
      throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "': bad integer '" + v + "'");
  }
}

double KvConfig::get_double(const std::string& key, double def)
{
  bool found = false;
  std::string v = take(key, found);
  if (!found)
    return def;
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size())
      throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "': bad number '" + v + "'");
  }
}

bool KvConfig::get_bool(const std::string& key, bool def)
{
  bool found = false;
  std::string v = take(key, found);
  if (!found)
    return def;
  std::string lower = v;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "true" || lower == "1" || lower == "on" || lower == "yes")
    return true;
  if (lower == "false" || lower == "0" || lower == "off" || lower == "no")
    return false;
  throw ConfigError(origin_ + ": key '" + key + "': bad boolean '" + v + "'");
}

void KvConfig::reject_unknown_keys() const
{
  if (kv_.empty())
    return;
  std::string msg = origin_ + ": unknown key(s):";
  for (auto& [k, v] : kv_)
    msg += " '" + k + "'";
  throw ConfigError(msg);
}

} // namespace wpsim
