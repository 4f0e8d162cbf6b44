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

#ifndef WPSIM_CORE_HPP
#define WPSIM_CORE_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "wpsim/bpu.hpp"
#include "wpsim/cache.hpp"
#include "wpsim/metrics.hpp"
#include "wpsim/sim_config.hpp"
#include "wpsim/trace.hpp"

namespace wpsim {

// Internal consistency failure (a WP instruction retiring, a corrupted
// retired stream, a deadlock). Maps to exit code 3 in the CLI.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunObserver {
  virtual ~RunObserver() = default;
  virtual void on_retire(uint64_t seq, const TraceRecord& rec)
  {
    (void)seq;
    (void)rec;
  }
  virtual void on_resteer(const char* source, uint64_t trigger_seq)
  {
    (void)source;
    (void)trigger_seq;
  }
};

// One simulated core. Owns pipeline state and the branch predictor; the
// cache hierarchy is passed in so tests can observe it.
class SimCore
{
public:
  SimCore(const TraceImage& trace, const SimConfig& cfg, CacheHierarchy& caches, RunObserver* observer = nullptr);

  void step(); // advance one cycle (all stages, reverse pipeline order)
  bool done() const;
  RunStats finish(); // runs to completion, then returns stats

  uint64_t current_cycle() const { return cycle_; }
  uint64_t retired() const { return retired_total_; }

  // occupancies, for capacity monitoring
  size_t rob_size() const { return rob_.size(); }
  size_t iq_size() const { return iq_.size(); }
  size_t lq_size() const { return lq_count_; }
  size_t sq_size() const { return sq_count_; }
  size_t ftq_size() const { return ftq_.size(); }
  size_t fetch_buf_size() const { return fetch_buf_.size(); }
  size_t rename_buf_size() const { return rename_buf_.size(); }
  size_t free_int_tags() const { return free_int_.size(); }
  size_t free_vec_tags() const { return free_vec_.size(); }

  // free + mapped + held-by-in-flight == pool size, for both pools
  bool phys_conservation_holds() const;

private:
  using PhysTag = uint16_t;
  static constexpr PhysTag kNoTag = UINT16_MAX;
  static constexpr size_t kArchRegs = 255;
  static constexpr size_t kFetchBufCap = 64;
  static constexpr size_t kRenameBufCap = 64;
  static constexpr uint64_t kDeadlockCycles = 500000;

  enum class EntryState : uint8_t { dispatched, executing, completed };

  struct FrontRecord {
    uint64_t seq = 0;
    uint32_t idx = 0;
    uint64_t ready_cycle = 0;
  };

  struct RobEntry {
    uint64_t seq = 0;
    uint32_t idx = 0;
    OpClass cls = OpClass::alu;
    EntryState state = EntryState::dispatched;
    bool is_wp = false;
    bool in_lq = false;
    bool in_sq = false;
    uint8_t n_dst = 0;
    uint8_t n_src = 0;
    std::array<PhysTag, 2> dst{kNoTag, kNoTag};
    std::array<PhysTag, 2> prev{kNoTag, kNoTag};
    std::array<PhysTag, 4> src{kNoTag, kNoTag, kNoTag, kNoTag};
  };

  // fill-time bookkeeping for branches, triggers and stalls
  struct BranchInfo {
    Prediction pred;
    HistoryToken token;
    bool is_branch = false;
    bool mispredicted = false;
    bool stall_source = false;      // fill is waiting on this resolution
    bool decode_resolvable = false; // unconditional direct class
    bool resolved = false;
  };

  struct Episode {
    uint64_t trigger_seq = 0;
    uint32_t trigger_idx = 0;
    TriggerKind kind = TriggerKind::branch_mispredict;
    bool decode_resolvable = false;
    uint32_t seg_end = 0; // first record index past the segment
  };

  struct RenameCheckpoint {
    uint64_t seq = 0;
    std::array<PhysTag, kArchRegs> map{};
  };

  // pipeline stages, called in reverse order each cycle
  void retire_stage();
  void execute_stage();
  void rename_dispatch_stage();
  void decode_stage();
  void fetch_stage();
  void ftq_fill_stage();

  void fill_one_entry();
  uint32_t segment_end(uint32_t trigger_idx) const;

  void schedule_completion(uint64_t seq, uint64_t lat);
  void complete(uint64_t seq);
  void issue_ready();
  bool sources_ready(const RobEntry& e) const;

  void decode_resteer(const FrontRecord& fr);
  void execute_resteer(RobEntry& trigger);
  void resolve_stall(uint64_t seq, const TraceRecord& rec, BranchInfo& info, bool at_decode);
  void squash_younger(uint64_t trigger_seq);
  void squash_scan(uint64_t trigger_seq);

  bool is_vec_arch(uint8_t arch) const { return arch >= cfg_.vec_reg_base; }
  PhysTag alloc_tag(uint8_t arch, bool& ok);
  void free_tag(PhysTag tag);

  RobEntry* rob_find(uint64_t seq);
  void bump_warmup_window();
  void check_progress();

  const TraceImage& trace_;
  SimConfig cfg_;
  CacheHierarchy& caches_;
  RunObserver* observer_;
  BranchPredictor bpu_;

  // front end
  Ftq ftq_;
  std::deque<FrontRecord> fetch_buf_;
  std::deque<FrontRecord> rename_buf_;
  uint64_t cursor_ = 0;   // next trace record index for FTQ fill
  uint64_t next_seq_ = 1; // 0 is reserved
  bool fill_wait_resolution_ = false;
  uint64_t fill_wait_seq_ = 0;
  uint64_t fill_resume_cycle_ = 0;
  std::optional<Episode> episode_;
  bool episode_exhausted_ = false;

  std::map<uint64_t, BranchInfo> branch_info_;

  // back end
  struct IqEntry {
    uint64_t seq;
    RobEntry* entry; // deque references are stable while the entry lives
  };
  static constexpr size_t kCompletionRing = 4096; // must exceed any op latency

  std::deque<RobEntry> rob_;
  std::vector<IqEntry> iq_;
  size_t lq_count_ = 0;
  size_t sq_count_ = 0;
  std::array<PhysTag, kArchRegs> map_{};
  std::vector<PhysTag> free_int_;
  std::vector<PhysTag> free_vec_;
  std::vector<bool> tag_ready_;
  std::deque<RenameCheckpoint> checkpoints_;
  std::vector<std::vector<uint64_t>> completions_{kCompletionRing}; // ring keyed by cycle

  // run control
  uint64_t cycle_ = 0;
  uint64_t retired_total_ = 0;
  uint64_t expected_retire_idx_ = 0;
  bool halt_ = false;
  bool warmup_done_ = false;
  uint64_t warmup_end_cycle_ = 0;
  uint64_t last_retire_cycle_ = 0;

  RunStats stats_;
};

// Convenience wrappers: validate, simulate, collect stats.
RunStats run_trace(const TraceImage& trace, const SimConfig& cfg, CacheHierarchy& caches, RunObserver* observer = nullptr);
RunStats run_trace(const TraceImage& trace, const SimConfig& cfg, RunObserver* observer = nullptr);

// Builds a TraceImage (including the content hash the file would have) from
// in-memory records.
TraceImage make_image(const TraceHeader& header, std::vector<TraceRecord> records);

} // namespace wpsim

#endif
