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

#ifndef WPSIM_METRICS_HPP
#define WPSIM_METRICS_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wpsim/cache.hpp"

namespace wpsim {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Counter set produced by one simulation run. All counters cover the
// post-warmup window.
struct RunStats {
  std::string mode = "wp"; // "wp" or "cp"
  uint64_t trace_hash = 0;
  uint64_t config_identity_hash = 0;
  std::map<std::string, std::string> config_echo;

  uint64_t cycles = 0;
  uint64_t retired_cp_instructions = 0;
  uint64_t fetched_cp = 0;
  uint64_t fetched_wp = 0;
  uint64_t renamed_cp = 0;
  uint64_t renamed_wp = 0;
  uint64_t decode_resteers = 0;
  uint64_t execute_resteers = 0;
  uint64_t no_segment_mispredicts = 0;
  uint64_t wp_fetch_idle_cycles = 0;
  uint64_t rob_full_events = 0;
  std::map<uint64_t, uint64_t> rob_occupancy_at_mispredict; // occupancy -> events
  uint64_t branch_predictions = 0;
  uint64_t branch_mispredictions = 0;
  uint64_t segments_played = 0;
  uint64_t segments_skipped = 0;
  uint64_t squash_scan_violations = 0;

  std::map<std::string, LevelStats> cache; // keyed l1i/l1d/l2/llc

  double ipc() const { return cycles ? static_cast<double>(retired_cp_instructions) / static_cast<double>(cycles) : 0.0; }
  double mpki() const
  {
    return retired_cp_instructions ? 1000.0 * static_cast<double>(branch_mispredictions) / static_cast<double>(retired_cp_instructions) : 0.0;
  }
  double mean_rob_occupancy_at_mispredict() const;

  nlohmann::ordered_json to_json() const;
  static RunStats from_json(const nlohmann::ordered_json& j);

  static std::string csv_header();
  std::string csv_row() const;
};

struct LevelDelta {
  double hit_delta_pct = 0.0;           // total hits, WP run vs CP run
  double miss_delta_pct = 0.0;          // total misses, WP run vs CP run
  double cp_miss_reduction_pct = 0.0;   // CP-attributed misses in WP run vs CP-run misses
  double useful_wp_fill_fraction = 0.0; // of all WP-origin fills in the WP run
};

// Derived WP-vs-CP quantities for a pair of runs over the same trace.
struct CompareReport {
  uint64_t trace_hash = 0;
  double ipc_wp = 0.0;
  double ipc_cp = 0.0;
  double ipc_speedup_pct = 0.0;
  double rel_instruction_increase_pct = 0.0;
  double mpki = 0.0; // branch MPKI of the CP run
  std::map<std::string, LevelDelta> cache;

  nlohmann::ordered_json to_json() const;
  static CompareReport from_json(const nlohmann::ordered_json& j);

  static std::string csv_header();
  std::string csv_row() const;
};

// wp and cp must describe the same trace and the same configuration apart
// from the mode. Throws MetricsError otherwise, and on empty runs.
CompareReport compare(const RunStats& wp, const RunStats& cp);

enum class EmitFormat { json, csv };

std::string emit(const RunStats& stats, EmitFormat fmt);
std::string emit(const CompareReport& report, EmitFormat fmt);
std::string emit_csv(const std::vector<RunStats>& rows);

RunStats load_run_stats(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace wpsim

#endif
