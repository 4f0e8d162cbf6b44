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

#ifndef WPSIM_KVCONFIG_HPP
#define WPSIM_KVCONFIG_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace wpsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` configuration text. Dots in keys act as section
// separators ("cache.l1i.ways = 8"). '#' starts a comment. Consumers must
// drain every key; leftovers are reported as unknown-key errors.
class KvConfig
{
public:
  KvConfig() = default;

  static KvConfig parse_text(const std::string& text, const std::string& origin = "<string>");
  static KvConfig parse_file(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  // Typed getters consume the key so reject_unknown_keys() can catch typos.
  std::string get_string(const std::string& key, const std::string& def);
  uint64_t get_u64(const std::string& key, uint64_t def);
  int64_t get_i64(const std::string& key, int64_t def);
  double get_double(const std::string& key, double def);
  bool get_bool(const std::string& key, bool def);

  void reject_unknown_keys() const;

  // Remaining (unconsumed) entries, e.g. for echoing a config.
  const std::map<std::string, std::string>& entries() const { return kv_; }

private:
  std::string take(const std::string& key, bool& found);

  std::map<std::string, std::string> kv_;
  std::string origin_;
};

} // namespace wpsim

#endif
