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

#include "wpsim/sim_config.hpp"

#include <sstream>

#include "wpsim/rng.hpp"

namespace wpsim {

const char* to_string(SimMode m) { return m == SimMode::wp ? "wp" : "cp"; }

void SimConfig::validate() const
{
  auto positive = [](uint64_t v, const char* name) {
    if (v == 0)
      throw ConfigError(std::string("config: ") + name + " must be positive");
  };
  positive(rob_entries, "core.rob_entries");
  positive(issue_entries, "core.issue_entries");
  positive(load_entries, "core.load_entries");
  positive(store_entries, "core.store_entries");
  positive(width_decode, "core.width_decode");
  positive(width_retire, "core.width_retire");
  positive(width_fetch, "core.width_fetch");
  positive(width_issue, "core.width_issue");
  positive(int_phys_regs, "core.int_phys_regs");
  positive(vec_phys_regs, "core.vec_phys_regs");
  positive(cp_resteer_penalty_cycles, "core.cp_resteer_penalty_cycles");
  positive(ftq_fill_per_cycle, "core.ftq_fill_per_cycle");
  positive(lat_alu, "core.lat_alu");
  positive(lat_long_alu, "core.lat_long_alu");
  positive(lat_branch, "core.lat_branch");
  positive(bpu.ftq_entries, "bpu.ftq_entries");
  positive(caches.memory_latency, "mem.latency_cycles");

  if (width_decode > rob_entries || width_retire > rob_entries)
    throw ConfigError("config: widths must not exceed core.rob_entries");
  if (vec_reg_base == 0 || vec_reg_base > 254)
    throw ConfigError("config: core.vec_reg_base must be in [1,254]");
  if (int_phys_regs <= vec_reg_base)
    throw ConfigError("config: core.int_phys_regs must exceed the architectural int register count");
  if (vec_phys_regs <= (255u - vec_reg_base))
    throw ConfigError("config: core.vec_phys_regs must exceed the architectural vec register count");

  caches.l1i.validate();
  caches.l1d.validate();
  caches.l2.validate();
  caches.llc.validate();
}

namespace {

void load_level(KvConfig& cfg, const std::string& prefix, CacheLevelConfig& c)
{
  c.size_bytes = cfg.get_u64(prefix + ".size_bytes", c.size_bytes);
  c.ways = cfg.get_u64(prefix + ".ways", c.ways);
  c.latency = cfg.get_u64(prefix + ".latency", c.latency);
  c.mshr_entries = cfg.get_u64(prefix + ".mshr_entries", c.mshr_entries);
}

} // namespace

SimConfig SimConfig::from_config(KvConfig cfg)
{
  SimConfig s;

  std::string mode = cfg.get_string("sim.mode", "wp");
  if (mode == "wp")
    s.mode = SimMode::wp;
  else if (mode == "cp")
    s.mode = SimMode::cp;
  else
    throw ConfigError("config: sim.mode must be wp or cp, got '" + mode + "'");
  s.warmup_instructions = cfg.get_u64("sim.warmup_instructions", s.warmup_instructions);
  s.max_instructions = cfg.get_u64("sim.max_instructions", s.max_instructions);

  s.rob_entries = cfg.get_u64("core.rob_entries", s.rob_entries);
  s.issue_entries = cfg.get_u64("core.issue_entries", s.issue_entries);
  s.load_entries = cfg.get_u64("core.load_entries", s.load_entries);
  s.store_entries = cfg.get_u64("core.store_entries", s.store_entries);
  s.width_decode = cfg.get_u64("core.width_decode", s.width_decode);
  s.width_retire = cfg.get_u64("core.width_retire", s.width_retire);
  s.width_fetch = cfg.get_u64("core.width_fetch", s.width_fetch);
  s.width_issue = cfg.get_u64("core.width_issue", s.width_issue);
  s.int_phys_regs = cfg.get_u64("core.int_phys_regs", s.int_phys_regs);
  s.vec_phys_regs = cfg.get_u64("core.vec_phys_regs", s.vec_phys_regs);
  s.vec_reg_base = cfg.get_u64("core.vec_reg_base", s.vec_reg_base);
  s.frontend_fetch_to_decode = cfg.get_u64("core.frontend_fetch_to_decode", s.frontend_fetch_to_decode);
  s.frontend_decode_to_rename = cfg.get_u64("core.frontend_decode_to_rename", s.frontend_decode_to_rename);
  s.frontend_rename_to_dispatch = cfg.get_u64("core.frontend_rename_to_dispatch", s.frontend_rename_to_dispatch);
  s.cp_resteer_penalty_cycles = cfg.get_u64("core.cp_resteer_penalty_cycles", s.cp_resteer_penalty_cycles);
  s.ftq_fill_per_cycle = cfg.get_u64("core.ftq_fill_per_cycle", s.ftq_fill_per_cycle);
  s.lat_alu = cfg.get_u64("core.lat_alu", s.lat_alu);
  s.lat_long_alu = cfg.get_u64("core.lat_long_alu", s.lat_long_alu);
  s.lat_branch = cfg.get_u64("core.lat_branch", s.lat_branch);
  s.wp_store_addr_installs = cfg.get_bool("core.wp_store_addr_installs", s.wp_store_addr_installs);
  s.squash_scan = cfg.get_bool("core.squash_scan", s.squash_scan);

  s.bpu.ftq_entries = cfg.get_u64("bpu.ftq_entries", s.bpu.ftq_entries);
  s.bpu.fetch_block_bytes = cfg.get_u64("bpu.fetch_block_bytes", s.bpu.fetch_block_bytes);
  s.bpu.tage_tagged_tables = cfg.get_u64("bpu.tage_tagged_tables", s.bpu.tage_tagged_tables);
  s.bpu.tage_entries_per_table = cfg.get_u64("bpu.tage_entries_per_table", s.bpu.tage_entries_per_table);
  s.bpu.tage_tag_bits = cfg.get_u64("bpu.tage_tag_bits", s.bpu.tage_tag_bits);
  s.bpu.tage_hist_l1 = cfg.get_u64("bpu.tage_hist_l1", s.bpu.tage_hist_l1);
  s.bpu.tage_hist_ratio = cfg.get_double("bpu.tage_hist_ratio", s.bpu.tage_hist_ratio);
  s.bpu.bimodal_entries = cfg.get_u64("bpu.bimodal_entries", s.bpu.bimodal_entries);
  s.bpu.ittage_tables = cfg.get_u64("bpu.ittage_tables", s.bpu.ittage_tables);
  s.bpu.ittage_entries_per_table = cfg.get_u64("bpu.ittage_entries_per_table", s.bpu.ittage_entries_per_table);
  s.bpu.ittage_tag_bits = cfg.get_u64("bpu.ittage_tag_bits", s.bpu.ittage_tag_bits);
  s.bpu.ittage_hist_l1 = cfg.get_u64("bpu.ittage_hist_l1", s.bpu.ittage_hist_l1);
  s.bpu.ittage_hist_ratio = cfg.get_double("bpu.ittage_hist_ratio", s.bpu.ittage_hist_ratio);
  s.bpu.btb_entries = cfg.get_u64("bpu.btb_entries", s.bpu.btb_entries);
  s.bpu.btb_ways = cfg.get_u64("bpu.btb_ways", s.bpu.btb_ways);
  s.bpu.ras_depth = cfg.get_u64("bpu.ras_depth", s.bpu.ras_depth);

  load_level(cfg, "cache.l1i", s.caches.l1i);
  load_level(cfg, "cache.l1d", s.caches.l1d);
  load_level(cfg, "cache.l2", s.caches.l2);
  load_level(cfg, "cache.llc", s.caches.llc);
  s.caches.memory_latency = cfg.get_u64("mem.latency_cycles", s.caches.memory_latency);

  cfg.reject_unknown_keys();
  s.validate();
  return s;
}

SimConfig SimConfig::from_file(const std::string& path)
{
  return from_config(KvConfig::parse_file(path));
}

std::map<std::string, std::string> SimConfig::echo() const
{
  std::map<std::string, std::string> m;
  auto put = [&](const std::string& k, auto v) { m[k] = std::to_string(v); };

  m["sim.mode"] = to_string(mode);
  put("sim.warmup_instructions", warmup_instructions);
  put("sim.max_instructions", max_instructions);
  put("core.rob_entries", rob_entries);
  put("core.issue_entries", issue_entries);
  put("core.load_entries", load_entries);
  put("core.store_entries", store_entries);
  put("core.width_decode", width_decode);
  put("core.width_retire", width_retire);
  put("core.width_fetch", width_fetch);
  put("core.width_issue", width_issue);
  put("core.int_phys_regs", int_phys_regs);
  put("core.vec_phys_regs", vec_phys_regs);
  put("core.vec_reg_base", vec_reg_base);
  put("core.frontend_fetch_to_decode", frontend_fetch_to_decode);
  put("core.frontend_decode_to_rename", frontend_decode_to_rename);
  put("core.frontend_rename_to_dispatch", frontend_rename_to_dispatch);
  put("core.cp_resteer_penalty_cycles", cp_resteer_penalty_cycles);
  put("core.ftq_fill_per_cycle", ftq_fill_per_cycle);
  put("core.lat_alu", lat_alu);
  put("core.lat_long_alu", lat_long_alu);
  put("core.lat_branch", lat_branch);
  m["core.wp_store_addr_installs"] = wp_store_addr_installs ? "true" : "false";
  m["core.squash_scan"] = squash_scan ? "true" : "false";
  put("bpu.ftq_entries", bpu.ftq_entries);
  put("bpu.fetch_block_bytes", bpu.fetch_block_bytes);
  put("bpu.tage_tagged_tables", bpu.tage_tagged_tables);
  put("bpu.tage_entries_per_table", bpu.tage_entries_per_table);
  put("bpu.tage_tag_bits", bpu.tage_tag_bits);
  put("bpu.tage_hist_l1", bpu.tage_hist_l1);
  put("bpu.tage_hist_ratio", bpu.tage_hist_ratio);
  put("bpu.bimodal_entries", bpu.bimodal_entries);
  put("bpu.ittage_tables", bpu.ittage_tables);
  put("bpu.ittage_entries_per_table", bpu.ittage_entries_per_table);
  put("bpu.ittage_tag_bits", bpu.ittage_tag_bits);
  put("bpu.ittage_hist_l1", bpu.ittage_hist_l1);
  put("bpu.ittage_hist_ratio", bpu.ittage_hist_ratio);
  put("bpu.btb_entries", bpu.btb_entries);
  put("bpu.btb_ways", bpu.btb_ways);
  put("bpu.ras_depth", bpu.ras_depth);
  for (const auto* lvl : {&caches.l1i, &caches.l1d, &caches.l2, &caches.llc}) {
    std::string p = "cache." + lvl->name;
    put(p + ".size_bytes", lvl->size_bytes);
    put(p + ".ways", lvl->ways);
    put(p + ".latency", lvl->latency);
    put(p + ".mshr_entries", lvl->mshr_entries);
  }
  put("mem.latency_cycles", caches.memory_latency);
  return m;
}

uint64_t SimConfig::identity_hash() const
{
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : echo()) {
    if (k == "sim.mode")
      continue; // a WP/CP pair must agree on everything else
    h = fnv1a(k.data(), k.size(), h);
    h = fnv1a("=", 1, h);
    h = fnv1a(v.data(), v.size(), h);
    h = fnv1a("\n", 1, h);
  }
  return h;
}

} // namespace wpsim
