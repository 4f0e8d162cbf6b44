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

#ifndef WPSIM_BPU_HPP
#define WPSIM_BPU_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wpsim/trace.hpp"

namespace wpsim {

struct BpuError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BpuConfig {
  uint64_t ftq_entries = 24;
  uint64_t fetch_block_bytes = 64;

  // TAGE direction predictor: bimodal base plus tagged tables with geometric
  // history lengths L(i) = floor(l1 * ratio^i).
  uint64_t tage_tagged_tables = 8;
  uint64_t tage_entries_per_table = 2048;
  uint64_t tage_tag_bits = 11;
  uint64_t tage_hist_l1 = 4;
  double tage_hist_ratio = 1.7;
  uint64_t bimodal_entries = 16384;

  // ITTAGE indirect-target predictor
  uint64_t ittage_tables = 4;
  uint64_t ittage_entries_per_table = 512;
  uint64_t ittage_tag_bits = 9;
  uint64_t ittage_hist_l1 = 4;
  double ittage_hist_ratio = 2.2;

  uint64_t btb_entries = 16384;
  uint64_t btb_ways = 8;
  uint64_t ras_depth = 32;

  // When set (the decoupled front-end case) predict-time speculation owns the
  // history/RAS advance and update() leaves them alone; repairs go through
  // history checkpoints. When clear, update() appends the actual outcome.
  bool speculative_history = false;
};

struct Prediction {
  bool taken = false;
  uint64_t target = 0; // fall-through when not taken

  // provider metadata
  int provider = -1; // tagged table id, -1 = bimodal base
  int alt = -1;
  bool provider_taken = false;
  bool alt_taken = false;
  bool used_alt = false;
  bool btb_hit = false;
  bool mispredicted = false; // vs the trace outcome handed to predict()
};

constexpr size_t kMaxTageTables = 16;
constexpr size_t kMaxIttageTables = 8;

// Snapshot of the speculative front-end state: history folds and the RAS
// position. Table contents are deliberately not part of it.
struct HistoryToken {
  uint64_t seq = 0;
  uint32_t hist_ptr = 0;
  uint64_t path_hist = 0;
  std::array<uint32_t, 3 * kMaxTageTables> tage_folds{};
  std::array<uint32_t, 3 * kMaxIttageTables> ittage_folds{};
  uint32_t ras_top = 0;
  uint32_t ras_count = 0;
};

enum class FtqEndReason : uint8_t { taken_branch, block_boundary };

struct FtqEntry {
  uint64_t fetch_block_addr = 0;
  uint64_t predicted_target = 0;
  FtqEndReason end_reason = FtqEndReason::block_boundary;
  bool prefetch_issued = false;
  bool wp = false; // attribution of the entry's first record

  // trace-driven bookkeeping: the records this entry covers and fetch state
  uint64_t first_idx = 0;
  uint64_t first_seq = 0;
  uint64_t count = 0;
  bool access_issued = false;
  uint64_t ready_cycle = 0;
};

// Fetch target queue: fixed ring, FIFO drain into fetch.
class Ftq
{
public:
  explicit Ftq(size_t capacity) : ring_(capacity) {}

  size_t capacity() const { return ring_.size(); }
  size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool full() const { return count_ == ring_.size(); }

  void push(const FtqEntry& e)
  {
    if (full())
      throw BpuError("FTQ push on full queue");
    ring_[(head_ + count_) % ring_.size()] = e;
    count_++;
  }

  FtqEntry& front()
  {
    if (empty())
      throw BpuError("FTQ front on empty queue");
    return ring_[head_];
  }

  FtqEntry pop()
  {
    FtqEntry e = front();
    head_ = (head_ + 1) % ring_.size();
    count_--;
    return e;
  }

  // Empties the queue and returns the flushed entries in order; on a
  // resteer these are the wrong-path prefetch set.
  std::vector<FtqEntry> flush()
  {
    std::vector<FtqEntry> out;
    out.reserve(count_);
    while (!empty())
      out.push_back(pop());
    return out;
  }

private:
  std::vector<FtqEntry> ring_;
  size_t head_ = 0;
  size_t count_ = 0;
};

// Branch prediction stack: TAGE-lite direction predictor, ITTAGE-lite
// indirect predictor, set-associative BTB and a return address stack.
class BranchPredictor
{
public:
  explicit BranchPredictor(const BpuConfig& cfg);

  // Pure lookup. The trace outcome is used only to fill in the mispredicted
  // metadata bit; the prediction itself never peeks at it.
  Prediction predict(uint64_t pc, OpClass cls, bool actual_taken, uint64_t actual_target);

  // Speculative advance of history and RAS with the outcome the front-end
  // committed to. Only meaningful with cfg.speculative_history set.
  void on_predicted(uint64_t pc, OpClass cls, bool taken, uint64_t target);

  // Resolution-time update: counters, allocation, BTB. Appends history and
  // applies RAS effects when speculative_history is off.
  void update(uint64_t pc, OpClass cls, const Prediction& pred, bool taken, uint64_t target);

  HistoryToken history_checkpoint();
  void history_restore(const HistoryToken& token); // throws BpuError on stale tokens

  // Re-append a resolved outcome after a restore (mispredict repair path).
  void append_outcome(uint64_t pc, OpClass cls, bool taken);

  const BpuConfig& config() const { return cfg_; }

private:
  struct TageEntry {
    uint16_t tag = 0;
    uint8_t ctr = 0; // 3-bit, taken when >= 4
    uint8_t u = 0;   // 2-bit
    bool valid = false;
  };
  struct IttageEntry {
    uint16_t tag = 0;
    uint64_t target = 0;
    uint8_t ctr = 0; // 2-bit confidence
    uint8_t u = 0;
    bool valid = false;
  };
  struct BtbEntry {
    bool valid = false;
    uint64_t tag = 0;
    uint64_t target = 0;
    OpClass cls = OpClass::cond_branch;
    uint64_t lru = 0;
  };

  // folded history register (incremental fold of the most recent `length`
  // bits of the circular history buffer into `width` bits)
  struct Fold {
    uint32_t comp = 0;
    uint32_t length = 0;
    uint32_t width = 0;
    uint32_t outpoint = 0;

    void init(uint32_t len, uint32_t w)
    {
      comp = 0;
      length = len;
      width = w;
      outpoint = len % w;
    }
    void update(const std::vector<uint8_t>& h, uint32_t ptr)
    {
      comp = (comp << 1) ^ h[ptr & (h.size() - 1)];
      comp ^= static_cast<uint32_t>(h[(ptr + length) & (h.size() - 1)]) << outpoint;
      comp ^= comp >> width;
      comp &= (1u << width) - 1;
    }
  };

  size_t tage_index(size_t table, uint64_t pc) const;
  uint16_t tage_tag(size_t table, uint64_t pc) const;
  size_t ittage_index(size_t table, uint64_t pc) const;
  uint16_t ittage_tag(size_t table, uint64_t pc) const;

  std::pair<bool, uint64_t> btb_lookup(uint64_t pc) const; // (hit, target)
  void btb_update(uint64_t pc, uint64_t target, OpClass cls);

  void push_history(bool taken, uint64_t pc);
  uint64_t ras_peek(bool& valid) const;
  void ras_push(uint64_t addr);
  void ras_pop();

  void update_direction(uint64_t pc, const Prediction& pred, bool taken);
  void update_indirect(uint64_t pc, const Prediction& pred, uint64_t target);

  BpuConfig cfg_;

  std::vector<uint8_t> bimodal_; // 2-bit counters, init weakly-not-taken
  std::vector<std::vector<TageEntry>> tage_;
  std::vector<uint32_t> tage_hist_len_;
  std::vector<std::vector<IttageEntry>> ittage_;
  std::vector<uint32_t> ittage_hist_len_;
  std::vector<BtbEntry> btb_;
  std::vector<uint64_t> ras_;

  std::vector<uint8_t> ghist_; // circular buffer, ptr decrements on insert
  uint32_t hist_ptr_ = 0;
  uint64_t path_hist_ = 0;
  std::array<Fold, 3 * kMaxTageTables> tage_folds_;     // idx, tag1, tag2 per table
  std::array<Fold, 3 * kMaxIttageTables> ittage_folds_; // idx, tag1, tag2 per table

  uint32_t ras_top_ = 0;
  uint32_t ras_count_ = 0;

  int8_t use_alt_on_na_ = 8; // 4-bit
  uint64_t alloc_seed_ = 0x5a17;
  uint64_t update_ticks_ = 0;
  uint64_t lru_clock_ = 0;

  uint64_t token_seq_ = 0;
  uint64_t max_valid_token_ = 0;
};

} // namespace wpsim

#endif
