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

#ifndef WPSIM_SIM_CONFIG_HPP
#define WPSIM_SIM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>

#include "wpsim/bpu.hpp"
#include "wpsim/cache.hpp"
#include "wpsim/kvconfig.hpp"

namespace wpsim {

enum class SimMode { wp, cp };

const char* to_string(SimMode m);

// Machine configuration. Defaults model a Golden-Cove-like core.
struct SimConfig {
  SimMode mode = SimMode::wp;
  uint64_t warmup_instructions = 0;
  uint64_t max_instructions = 0; // 0 = run the whole trace

  // back end
  uint64_t rob_entries = 512;
  uint64_t issue_entries = 194;
  uint64_t load_entries = 144;
  uint64_t store_entries = 112;
  uint64_t width_decode = 12;
  uint64_t width_retire = 12;
  uint64_t width_fetch = 12;
  uint64_t width_issue = 12;
  uint64_t int_phys_regs = 448;
  uint64_t vec_phys_regs = 400;
  uint64_t vec_reg_base = 128; // architectural ids >= this use the vector pool

  // front-end depths and penalties
  uint64_t frontend_fetch_to_decode = 4;
  uint64_t frontend_decode_to_rename = 2;
  uint64_t frontend_rename_to_dispatch = 2;
  uint64_t cp_resteer_penalty_cycles = 12;
  uint64_t ftq_fill_per_cycle = 3;

  // execution latencies
  uint64_t lat_alu = 1;
  uint64_t lat_long_alu = 12;
  uint64_t lat_branch = 1;

  bool wp_store_addr_installs = true; // WP store-address lookups may install lines
  bool squash_scan = true;            // structure scan after every resteer

  BpuConfig bpu;
  HierarchyConfig caches;

  void validate() const;

  static SimConfig from_config(KvConfig cfg);
  static SimConfig from_file(const std::string& path);

  // Flat key=value view of every field, used for the stats echo and hashing.
  std::map<std::string, std::string> echo() const;
  uint64_t identity_hash() const; // over echo() minus sim.mode
};

} // namespace wpsim

#endif
