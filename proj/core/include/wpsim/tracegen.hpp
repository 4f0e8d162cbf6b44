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

#ifndef WPSIM_TRACEGEN_HPP
#define WPSIM_TRACEGEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wpsim/kvconfig.hpp"
#include "wpsim/trace.hpp"

namespace wpsim {

enum class EmbeddedPredictor { oracle, bimodal, gshare };

// Parameters for the synthetic workload generator. The generator walks a
// randomized control-flow graph with an embedded reference predictor and
// emits a trace whose WP segments are the paths that predictor would have
// fetched after each misprediction.
struct WorkloadSpec {
  uint64_t seed = 1;
  uint64_t instr_count = 100000; // CP instructions to emit

  // CFG shape
  uint64_t n_blocks = 64;
  uint64_t block_len_min = 4;
  uint64_t block_len_max = 12;
  double cond_bias_a = 0.5; // Kumaraswamy parameters for per-branch taken bias
  double cond_bias_b = 0.5;
  double indirect_fraction = 0.05; // of block terminators
  uint64_t indirect_targets = 4;   // k targets per indirect site
  double call_fraction = 0.06;     // of block terminators
  double uncond_fraction = 0.08;   // of block terminators
  uint64_t call_depth_max = 4;
  uint64_t code_footprint_bytes = 0; // 0 = natural back-to-back layout

  // instruction mix inside blocks
  double load_fraction = 0.25;
  double store_fraction = 0.10;
  double longlat_fraction = 0.05;
  double vec_fraction = 0.05;
  double pointer_chase_fraction = 0.10; // of loads
  uint64_t data_working_set_bytes = 1 << 20;

  // embedded predictor and WP emission
  EmbeddedPredictor predictor = EmbeddedPredictor::bimodal;
  uint64_t predictor_table_bits = 12; // direction table entries = 2^bits
  uint64_t predictor_hist_bits = 12;  // gshare history length
  double mix = 1.0;                   // 1 = full table predictor, 0 = oracle
  double ls_trigger_prob = 0.0;       // per-load disambiguation-failure rate
  uint64_t wp_depth_limit = 512;      // max WP instructions per segment

  void validate() const; // throws ConfigError on unsatisfiable specs

  static WorkloadSpec from_config(KvConfig cfg);
  static WorkloadSpec from_file(const std::string& path);
};

// Deterministic: the same spec yields a byte-identical trace. The CP stream
// is a function of (seed, CFG parameters) only; the predictor choice moves
// segments around but never changes CP instruction content.
struct GeneratedTrace {
  TraceHeader header;
  std::vector<TraceRecord> records;
};

GeneratedTrace generate(const WorkloadSpec& spec);

struct GeneratorReport {
  uint64_t cp_records = 0;
  uint64_t wp_records = 0;
  uint64_t mispredict_triggers = 0; // branch-kind trigger records
  uint64_t ls_triggers = 0;
  double mispredict_density_per_ki = 0.0;          // triggers per 1000 CP instructions
  std::map<uint64_t, uint64_t> segment_length_hist; // length -> segment count
  uint64_t code_blocks_touched = 0;                 // distinct 64B code blocks
  uint64_t data_lines_touched = 0;                  // distinct 64B data lines
  double wp_reconvergence_fraction = 0.0; // WP records whose code block also appears on the CP

  std::string to_json() const;
};

GeneratorReport describe(const WorkloadSpec& spec, const std::vector<TraceRecord>& records);

} // namespace wpsim

#endif
