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

#include "wpsim/core.hpp"

#include <algorithm>
#include <sstream>

#include "wpsim/rng.hpp"

namespace wpsim {

namespace {

BpuConfig core_bpu_config(const SimConfig& cfg)
{
  BpuConfig b = cfg.bpu;
  b.speculative_history = true; // the decoupled front-end runs ahead
  return b;
}

} // namespace

SimCore::SimCore(const TraceImage& trace, const SimConfig& cfg, CacheHierarchy& caches, RunObserver* observer)
    : trace_(trace), cfg_(cfg), caches_(caches), observer_(observer), bpu_(core_bpu_config(cfg)), ftq_(cfg.bpu.ftq_entries)
{
  cfg_.validate();

  // initial rename map: architectural registers hold ready tags
  size_t n_int_arch = cfg_.vec_reg_base;
  size_t n_vec_arch = kArchRegs - cfg_.vec_reg_base;
  size_t total_tags = cfg_.int_phys_regs + cfg_.vec_phys_regs;
  tag_ready_.assign(total_tags, true);

  for (size_t a = 0; a < n_int_arch; a++)
    map_[a] = static_cast<PhysTag>(a);
  for (size_t a = 0; a < n_vec_arch; a++)
    map_[cfg_.vec_reg_base + a] = static_cast<PhysTag>(cfg_.int_phys_regs + a);

  free_int_.reserve(cfg_.int_phys_regs - n_int_arch);
  for (size_t t = cfg_.int_phys_regs; t-- > n_int_arch;)
    free_int_.push_back(static_cast<PhysTag>(t));
  free_vec_.reserve(cfg_.vec_phys_regs - n_vec_arch);
  for (size_t t = cfg_.int_phys_regs + cfg_.vec_phys_regs; t-- > cfg_.int_phys_regs + n_vec_arch;)
    free_vec_.push_back(static_cast<PhysTag>(t));

  stats_.mode = to_string(cfg_.mode);
  stats_.trace_hash = trace_.content_hash;
  stats_.config_identity_hash = cfg_.identity_hash();
  stats_.config_echo = cfg_.echo();

  warmup_done_ = cfg_.warmup_instructions == 0;

  // first expected CP record
  expected_retire_idx_ = 0;
  while (expected_retire_idx_ < trace_.records.size() && trace_.records[expected_retire_idx_].wrong_path())
    expected_retire_idx_++;
}

SimCore::PhysTag SimCore::alloc_tag(uint8_t arch, bool& ok)
{
  auto& pool = is_vec_arch(arch) ? free_vec_ : free_int_;
  if (pool.empty()) {
    ok = false;
    return kNoTag;
  }
  PhysTag t = pool.back();
  pool.pop_back();
  tag_ready_[t] = false;
  ok = true;
  return t;
}

void SimCore::free_tag(PhysTag tag)
{
  if (tag < cfg_.int_phys_regs)
    free_int_.push_back(tag);
  else
    free_vec_.push_back(tag);
}

SimCore::RobEntry* SimCore::rob_find(uint64_t seq)
{
  auto it = std::lower_bound(rob_.begin(), rob_.end(), seq, [](const RobEntry& e, uint64_t s) { return e.seq < s; });
  if (it == rob_.end() || it->seq != seq)
    return nullptr;
  return &*it;
}

uint32_t SimCore::segment_end(uint32_t trigger_idx) const
{
  uint64_t i = trigger_idx + 1;
  while (i < trace_.records.size() && trace_.records[i].wrong_path())
    i++;
  return static_cast<uint32_t>(i);
}

// ---- FTQ fill: the BPU walking ahead of fetch along the trace ----

void SimCore::ftq_fill_stage()
{
  for (uint64_t n = 0; n < cfg_.ftq_fill_per_cycle; n++) {
    if (ftq_.full() || fill_wait_resolution_ || cycle_ < fill_resume_cycle_)
      return;
    if (episode_ && episode_exhausted_)
      return; // recorded wrong path ran out; idle until the resteer
    if (cursor_ >= trace_.records.size())
      return;
    fill_one_entry();
  }
}

void SimCore::fill_one_entry()
{
  const auto& records = trace_.records;
  const uint64_t block_mask = ~(cfg_.bpu.fetch_block_bytes - 1);

  FtqEntry entry;
  entry.fetch_block_addr = records[cursor_].pc & block_mask;
  entry.wp = records[cursor_].wrong_path();
  entry.first_idx = cursor_;
  entry.first_seq = next_seq_;

  bool entry_done = false;
  bool prev_taken_branch = false;
  while (!entry_done) {
    if (cursor_ >= records.size())
      break;
    if (episode_ && episode_exhausted_)
      break;
    const TraceRecord& rec = records[cursor_];
    if ((rec.pc & block_mask) != entry.fetch_block_addr) {
      if (prev_taken_branch)
        entry.end_reason = FtqEndReason::taken_branch;
      break;
    }
    prev_taken_branch = false;

    uint64_t seq = next_seq_++;
    uint32_t idx = static_cast<uint32_t>(cursor_);
    cursor_++;
    entry.count++;

    if (rec.wrong_path()) {
      // recorded wrong path: follow it, no prediction, no history updates
      if (episode_ && cursor_ == episode_->seg_end) {
        episode_exhausted_ = true;
        entry_done = true;
      }
      if (is_branch(rec.op_class) && rec.taken()) {
        entry.end_reason = FtqEndReason::taken_branch;
        entry.predicted_target = rec.target;
        entry_done = true;
      }
      continue;
    }

    bool has_seg = rec.trigger() && cursor_ < records.size() && records[cursor_].wrong_path();

    if (is_branch(rec.op_class)) {
      BranchInfo info;
      info.is_branch = true;
      info.token = bpu_.history_checkpoint();
      info.pred = bpu_.predict(rec.pc, rec.op_class, rec.taken(), rec.target);
      bpu_.on_predicted(rec.pc, rec.op_class, info.pred.taken, info.pred.target);
      info.mispredicted = info.pred.mispredicted;
      info.decode_resolvable = is_uncond_direct(rec.op_class);
      stats_.branch_predictions++;
      if (info.mispredicted)
        stats_.branch_mispredictions++;

      if (!info.mispredicted) {
        bool taken = rec.taken();
        uint64_t target = rec.target;
        if (has_seg) {
          // the producer went down the wrong path here but our BPU did not;
          // the entry ends because the record span is no longer contiguous
          cursor_ = segment_end(idx);
          stats_.segments_skipped++;
          entry_done = true;
        }
        branch_info_.emplace(seq, std::move(info));
        if (taken) {
          entry.end_reason = FtqEndReason::taken_branch;
          entry.predicted_target = target;
          entry_done = true;
        }
      } else if (cfg_.mode == SimMode::wp && has_seg) {
        // play the recorded segment until the trigger resolves
        Episode ep;
        ep.trigger_seq = seq;
        ep.trigger_idx = idx;
        ep.kind = TriggerKind::branch_mispredict;
        ep.decode_resolvable = info.decode_resolvable;
        ep.seg_end = segment_end(idx);
        episode_ = ep;
        episode_exhausted_ = false;
        stats_.segments_played++;
        prev_taken_branch = info.pred.taken;
        branch_info_.emplace(seq, std::move(info));
        // fill continues straight into the segment records
      } else {
        // no recorded wrong path to play (or CP mode): stall until resolved
        if (has_seg) {
          cursor_ = segment_end(idx);
          stats_.segments_skipped++;
        }
        if (cfg_.mode == SimMode::wp)
          stats_.no_segment_mispredicts++;
        info.stall_source = true;
        fill_wait_resolution_ = true;
        fill_wait_seq_ = seq;
        entry.end_reason = FtqEndReason::taken_branch;
        entry.predicted_target = info.pred.target;
        branch_info_.emplace(seq, std::move(info));
        entry_done = true;
      }
    } else if (rec.trigger() && rec.trigger_kind() == TriggerKind::ls_disambiguation && has_seg) {
      if (cfg_.mode == SimMode::wp) {
        Episode ep;
        ep.trigger_seq = seq;
        ep.trigger_idx = idx;
        ep.kind = TriggerKind::ls_disambiguation;
        ep.decode_resolvable = false;
        ep.seg_end = segment_end(idx);
        episode_ = ep;
        episode_exhausted_ = false;
        stats_.segments_played++;
        BranchInfo info; // checkpoint only; loads are not predicted
        info.token = bpu_.history_checkpoint();
        branch_info_.emplace(seq, std::move(info));
      } else {
        cursor_ = segment_end(idx);
        stats_.segments_skipped++;
        entry_done = true; // record span is no longer contiguous
      }
    }
  }

  if (entry.count == 0)
    return;
  if (entry.predicted_target == 0)
    entry.predicted_target = entry.fetch_block_addr + cfg_.bpu.fetch_block_bytes;

  // FDIP: the prefetch goes out as soon as the entry enters the FTQ
  caches_.ftq_prefetch({entry.fetch_block_addr}, entry.wp ? Attribution::wp : Attribution::cp, cycle_);
  entry.prefetch_issued = true;
  ftq_.push(entry);
}

// ---- fetch ----

void SimCore::fetch_stage()
{
  uint64_t budget = cfg_.width_fetch;
  bool fetched_any = false;

  while (budget > 0 && !ftq_.empty() && fetch_buf_.size() < kFetchBufCap) {
    FtqEntry& e = ftq_.front();
    if (!e.access_issued) {
      AccessResult r = caches_.ifetch(e.fetch_block_addr, e.wp ? Attribution::wp : Attribution::cp, cycle_);
      if (r.retry)
        break; // L1I MSHR full, try again next cycle
      e.access_issued = true;
      // a hit is absorbed by the front-end depth; a miss stalls until fill
      e.ready_cycle = r.hit ? cycle_ : cycle_ + r.latency;
    }
    if (cycle_ < e.ready_cycle)
      break;

    while (budget > 0 && e.count > 0 && fetch_buf_.size() < kFetchBufCap) {
      const TraceRecord& rec = trace_.records[e.first_idx];
      fetch_buf_.push_back({e.first_seq, static_cast<uint32_t>(e.first_idx), cycle_ + cfg_.frontend_fetch_to_decode});
      if (rec.wrong_path())
        stats_.fetched_wp++;
      else
        stats_.fetched_cp++;
      e.first_idx++;
      e.first_seq++;
      e.count--;
      budget--;
      fetched_any = true;
    }
    if (e.count == 0)
      ftq_.pop();
    else
      break;
  }

  if (cfg_.mode == SimMode::wp && episode_ && episode_exhausted_ && ftq_.empty() && !fetched_any)
    stats_.wp_fetch_idle_cycles++;
}

// ---- decode ----

void SimCore::decode_stage()
{
  uint64_t budget = cfg_.width_decode;
  const uint64_t delay = cfg_.frontend_decode_to_rename + cfg_.frontend_rename_to_dispatch;

  while (budget > 0 && !fetch_buf_.empty() && rename_buf_.size() < kRenameBufCap) {
    FrontRecord fr = fetch_buf_.front();
    if (fr.ready_cycle > cycle_)
      break;
    const TraceRecord& rec = trace_.records[fr.idx];

    if (episode_ && !rec.wrong_path() && fr.seq == episode_->trigger_seq && episode_->decode_resolvable) {
      // mispredicted unconditional direct branch identified at decode
      fetch_buf_.pop_front();
      rename_buf_.push_back({fr.seq, fr.idx, cycle_ + delay});
      decode_resteer(fr);
      return; // everything younger is gone
    }

    if (auto it = branch_info_.find(fr.seq);
        it != branch_info_.end() && it->second.stall_source && it->second.decode_resolvable && !it->second.resolved)
      resolve_stall(fr.seq, rec, it->second, true);

    fetch_buf_.pop_front();
    rename_buf_.push_back({fr.seq, fr.idx, cycle_ + delay});
    budget--;
  }
}

void SimCore::decode_resteer(const FrontRecord& fr)
{
  Episode ep = *episode_;
  const TraceRecord& rec = trace_.records[fr.idx];

  stats_.decode_resteers++;
  stats_.rob_occupancy_at_mispredict[rob_.size()]++;
  if (observer_)
    observer_->on_resteer("decode", fr.seq);

  // squash all younger fetched instructions; none of them reached rename
  fetch_buf_.clear();
  ftq_.flush();
  branch_info_.erase(branch_info_.upper_bound(fr.seq), branch_info_.end());

  BranchInfo& info = branch_info_.at(fr.seq);
  bpu_.history_restore(info.token);
  bpu_.append_outcome(rec.pc, rec.op_class, true);
  bpu_.update(rec.pc, rec.op_class, info.pred, true, rec.target);
  info.resolved = true;

  cursor_ = ep.seg_end; // skip the rest of the recorded segment
  episode_.reset();
  episode_exhausted_ = false;
  fill_resume_cycle_ = cycle_ + 1;

  if (cfg_.squash_scan)
    squash_scan(fr.seq);
}

// ---- rename + dispatch ----

void SimCore::rename_dispatch_stage()
{
  uint64_t budget = cfg_.width_decode;

  while (budget > 0 && !rename_buf_.empty() && rename_buf_.front().ready_cycle <= cycle_) {
    if (rob_.size() >= cfg_.rob_entries) {
      stats_.rob_full_events++;
      break;
    }
    if (iq_.size() >= cfg_.issue_entries)
      break;

    const FrontRecord fr = rename_buf_.front();
    const TraceRecord& rec = trace_.records[fr.idx];
    bool is_load = rec.op_class == OpClass::load;
    bool is_store = rec.op_class == OpClass::store;
    if (is_load && lq_count_ >= cfg_.load_entries)
      break;
    if (is_store && sq_count_ >= cfg_.store_entries)
      break;

    size_t need_int = 0, need_vec = 0;
    for (uint8_t d : rec.dst_regs)
      if (d != kRegUnused)
        (is_vec_arch(d) ? need_vec : need_int)++;
    if (free_int_.size() < need_int || free_vec_.size() < need_vec)
      break;

    RobEntry e;
    e.seq = fr.seq;
    e.idx = fr.idx;
    e.cls = rec.op_class;
    e.is_wp = rec.wrong_path();
    for (uint8_t s : rec.src_regs)
      if (s != kRegUnused)
        e.src[e.n_src++] = map_[s];
    for (uint8_t d : rec.dst_regs) {
      if (d == kRegUnused)
        continue;
      bool ok = false;
      PhysTag t = alloc_tag(d, ok);
      e.prev[e.n_dst] = map_[d];
      e.dst[e.n_dst] = t;
      e.n_dst++;
      map_[d] = t;
    }
    if (is_load) {
      e.in_lq = true;
      lq_count_++;
    }
    if (is_store) {
      e.in_sq = true;
      sq_count_++;
    }
    rob_.push_back(e);
    iq_.push_back({e.seq, &rob_.back()});

    if (is_branch(rec.op_class) || rec.trigger())
      checkpoints_.push_back({e.seq, map_});

    if (e.is_wp)
      stats_.renamed_wp++;
    else
      stats_.renamed_cp++;

    rename_buf_.pop_front();
    budget--;
  }
}

// ---- execute ----

bool SimCore::sources_ready(const RobEntry& e) const
{
  for (size_t i = 0; i < e.n_src; i++)
    if (!tag_ready_[e.src[i]])
      return false;
  return true;
}

void SimCore::issue_ready()
{
  uint64_t issued = 0;
  size_t w = 0;
  for (size_t r = 0; r < iq_.size(); r++) {
    if (issued >= cfg_.width_issue) {
      iq_[w++] = iq_[r];
      continue;
    }
    RobEntry* e = iq_[r].entry;
    if (!sources_ready(*e)) {
      iq_[w++] = iq_[r];
      continue;
    }

    uint64_t lat = 0;
    bool issued_ok = true;
    const TraceRecord& rec = trace_.records[e->idx];
    Attribution attr = e->is_wp ? Attribution::wp : Attribution::cp;

    switch (e->cls) {
    case OpClass::load: {
      AccessResult r2 = caches_.data(rec.mem_addr, AccessKind::load, attr, cycle_);
      if (r2.retry)
        issued_ok = false;
      else
        lat = r2.latency;
      break;
    }
    case OpClass::store: {
      if (!(e->is_wp && !cfg_.wp_store_addr_installs)) {
        AccessResult r2 = caches_.data(rec.mem_addr, AccessKind::store_addr, attr, cycle_);
        if (r2.retry)
          issued_ok = false;
      }
      lat = 1; // address generation only; the commit happens at retire
      break;
    }
    case OpClass::long_alu:
      lat = cfg_.lat_long_alu;
      break;
    case OpClass::alu:
      lat = cfg_.lat_alu;
      break;
    default:
      lat = cfg_.lat_branch;
      break;
    }

    if (!issued_ok) {
      iq_[w++] = iq_[r]; // MSHR full: retry next cycle
      continue;
    }
    e->state = EntryState::executing;
    schedule_completion(e->seq, std::max<uint64_t>(1, lat));
    issued++;
  }
  iq_.resize(w);
}

void SimCore::schedule_completion(uint64_t seq, uint64_t lat)
{
  if (lat >= kCompletionRing)
    throw SimError("operation latency " + std::to_string(lat) + " exceeds the completion ring");
  completions_[(cycle_ + lat) % kCompletionRing].push_back(seq);
}

void SimCore::complete(uint64_t seq)
{
  RobEntry* e = rob_find(seq);
  if (!e || e->state != EntryState::executing)
    return; // squashed in flight
  e->state = EntryState::completed;
  for (size_t i = 0; i < e->n_dst; i++)
    tag_ready_[e->dst[i]] = true;
  if (e->in_lq) {
    e->in_lq = false;
    lq_count_--;
  }

  if (e->is_wp)
    return; // wrong-path instructions never resteer or train anything

  if (episode_ && seq == episode_->trigger_seq) {
    execute_resteer(*e);
    return;
  }

  if (is_branch(e->cls)) {
    auto it = branch_info_.find(seq);
    if (it != branch_info_.end() && !it->second.resolved) {
      const TraceRecord& rec = trace_.records[e->idx];
      if (it->second.stall_source) {
        resolve_stall(seq, rec, it->second, false);
      } else {
        bpu_.update(rec.pc, e->cls, it->second.pred, rec.taken(), rec.target);
        it->second.resolved = true;
      }
    }
  }
}

void SimCore::execute_stage()
{
  auto& bucket = completions_[cycle_ % kCompletionRing];
  if (!bucket.empty()) {
    std::vector<uint64_t> seqs;
    seqs.swap(bucket);
    for (uint64_t seq : seqs)
      complete(seq);
  }
  issue_ready();
}

void SimCore::execute_resteer(RobEntry& trigger)
{
  const uint64_t trigger_seq = trigger.seq;
  const uint32_t trigger_idx = trigger.idx;
  const OpClass cls = trigger.cls;
  const Episode ep = *episode_;
  const TraceRecord& rec = trace_.records[trigger_idx];

  stats_.execute_resteers++;
  if (ep.kind == TriggerKind::branch_mispredict)
    stats_.rob_occupancy_at_mispredict[rob_.size()]++;
  if (observer_)
    observer_->on_resteer("execute", trigger_seq);

  squash_younger(trigger_seq);

  BranchInfo& info = branch_info_.at(trigger_seq);
  bpu_.history_restore(info.token);
  if (info.is_branch) {
    bpu_.append_outcome(rec.pc, cls, rec.taken());
    bpu_.update(rec.pc, cls, info.pred, rec.taken(), rec.target);
  }
  info.resolved = true;

  cursor_ = ep.seg_end; // redirect fetch to the correct-path successor
  episode_.reset();
  episode_exhausted_ = false;
  fill_resume_cycle_ = cycle_ + 1;

  if (cfg_.squash_scan)
    squash_scan(trigger_seq);
}

void SimCore::resolve_stall(uint64_t seq, const TraceRecord& rec, BranchInfo& info, bool at_decode)
{
  if (at_decode)
    stats_.decode_resteers++;
  else
    stats_.execute_resteers++;
  stats_.rob_occupancy_at_mispredict[rob_.size()]++;
  if (observer_)
    observer_->on_resteer(at_decode ? "decode" : "execute", seq);

  bpu_.history_restore(info.token);
  bpu_.append_outcome(rec.pc, rec.op_class, rec.taken());
  bpu_.update(rec.pc, rec.op_class, info.pred, rec.taken(), rec.target);
  info.resolved = true;

  if (fill_wait_resolution_ && fill_wait_seq_ == seq) {
    fill_wait_resolution_ = false;
    fill_resume_cycle_ = cycle_ + cfg_.cp_resteer_penalty_cycles; // constant repair penalty
  }
  if (cfg_.squash_scan)
    squash_scan(seq);
}

void SimCore::squash_younger(uint64_t trigger_seq)
{
  size_t w = 0;
  for (size_t r = 0; r < iq_.size(); r++)
    if (iq_[r].seq <= trigger_seq)
      iq_[w++] = iq_[r];
  iq_.resize(w);

  while (!rob_.empty() && rob_.back().seq > trigger_seq) {
    RobEntry& e = rob_.back();
    for (size_t i = 0; i < e.n_dst; i++)
      free_tag(e.dst[i]);
    if (e.in_lq)
      lq_count_--;
    if (e.in_sq)
      sq_count_--;
    rob_.pop_back();
  }

  // everything on the front side is younger than an executing trigger
  fetch_buf_.clear();
  rename_buf_.clear();
  ftq_.flush();

  while (!checkpoints_.empty() && checkpoints_.back().seq > trigger_seq)
    checkpoints_.pop_back();
  if (checkpoints_.empty() || checkpoints_.back().seq != trigger_seq)
    throw SimError("missing rename checkpoint for trigger seq " + std::to_string(trigger_seq));
  map_ = checkpoints_.back().map;

  branch_info_.erase(branch_info_.upper_bound(trigger_seq), branch_info_.end());
}

bool SimCore::phys_conservation_holds() const
{
  size_t mapped_int = 0, mapped_vec = 0;
  for (size_t a = 0; a < kArchRegs; a++) {
    if (map_[a] < cfg_.int_phys_regs)
      mapped_int++;
    else
      mapped_vec++;
  }
  size_t held_int = 0, held_vec = 0;
  for (const auto& e : rob_)
    for (size_t i = 0; i < e.n_dst; i++) {
      if (e.prev[i] < cfg_.int_phys_regs)
        held_int++;
      else
        held_vec++;
    }
  return free_int_.size() + mapped_int + held_int == cfg_.int_phys_regs && free_vec_.size() + mapped_vec + held_vec == cfg_.vec_phys_regs;
}

void SimCore::squash_scan(uint64_t trigger_seq)
{
  uint64_t bad = 0;
  for (const auto& e : rob_)
    if (e.seq > trigger_seq)
      bad++;
  for (const auto& q : iq_)
    if (q.seq > trigger_seq)
      bad++;
  for (const auto& f : fetch_buf_)
    if (f.seq > trigger_seq)
      bad++;
  for (const auto& f : rename_buf_)
    if (f.seq > trigger_seq)
      bad++;
  if (!ftq_.empty())
    bad += ftq_.size(); // a resteer must leave the FTQ empty
  for (auto it = branch_info_.upper_bound(trigger_seq); it != branch_info_.end(); ++it)
    bad++;
  for (const auto& c : checkpoints_)
    if (c.seq > trigger_seq)
      bad++;

  if (!phys_conservation_holds())
    bad++;

  stats_.squash_scan_violations += bad;
}

// ---- retire ----

void SimCore::retire_stage()
{
  uint64_t n = 0;
  while (n < cfg_.width_retire && !rob_.empty()) {
    RobEntry& head = rob_.front();
    if (head.state != EntryState::completed)
      break;
    if (head.is_wp)
      throw SimError("wrong-path instruction reached ROB head unresolved (seq " + std::to_string(head.seq) + ")");

    const TraceRecord& rec = trace_.records[head.idx];
    if (head.idx != expected_retire_idx_)
      throw SimError("retired stream diverged from the trace CP stream at record " + std::to_string(head.idx) + " (expected " +
                     std::to_string(expected_retire_idx_) + ")");
    expected_retire_idx_ = head.idx + 1;
    while (expected_retire_idx_ < trace_.records.size() && trace_.records[expected_retire_idx_].wrong_path())
      expected_retire_idx_++;

    for (size_t i = 0; i < head.n_dst; i++)
      free_tag(head.prev[i]);
    if (head.in_sq)
      sq_count_--; // the store commits now

    branch_info_.erase(head.seq);
    while (!checkpoints_.empty() && checkpoints_.front().seq <= head.seq)
      checkpoints_.pop_front();

    retired_total_++;
    last_retire_cycle_ = cycle_;
    if (observer_)
      observer_->on_retire(head.seq, rec);
    rob_.pop_front();
    n++;

    if (!warmup_done_ && retired_total_ >= cfg_.warmup_instructions)
      bump_warmup_window();
    if (cfg_.max_instructions && warmup_done_ && retired_total_ - cfg_.warmup_instructions >= cfg_.max_instructions) {
      halt_ = true;
      break;
    }
  }
  if (rob_.empty())
    last_retire_cycle_ = cycle_;
}

void SimCore::bump_warmup_window()
{
  warmup_done_ = true;
  warmup_end_cycle_ = cycle_;
  RunStats fresh;
  fresh.mode = stats_.mode;
  fresh.trace_hash = stats_.trace_hash;
  fresh.config_identity_hash = stats_.config_identity_hash;
  fresh.config_echo = stats_.config_echo;
  stats_ = std::move(fresh);
  caches_.reset_stats();
}

void SimCore::check_progress()
{
  if (cycle_ - last_retire_cycle_ <= kDeadlockCycles)
    return;
  std::ostringstream ss;
  ss << "no retirement progress for " << kDeadlockCycles << " cycles at cycle " << cycle_ << " (rob=" << rob_.size() << " iq=" << iq_.size()
     << " ftq=" << ftq_.size() << " cursor=" << cursor_ << "/" << trace_.records.size() << ")";
  throw SimError(ss.str());
}

void SimCore::step()
{
  cycle_++;
  retire_stage();
  execute_stage();
  rename_dispatch_stage();
  decode_stage();
  fetch_stage();
  ftq_fill_stage();
  check_progress();
}

bool SimCore::done() const
{
  if (halt_)
    return true;
  return cursor_ >= trace_.records.size() && !episode_ && !fill_wait_resolution_ && ftq_.empty() && fetch_buf_.empty() && rename_buf_.empty() &&
         rob_.empty();
}

RunStats SimCore::finish()
{
  while (!done())
    step();

  stats_.cycles = cycle_ - warmup_end_cycle_;
  stats_.retired_cp_instructions = retired_total_ - (warmup_done_ ? cfg_.warmup_instructions : 0);
  for (const char* lvl : CacheHierarchy::kLevelNames)
    stats_.cache[lvl] = caches_.snapshot(lvl, cycle_);
  return stats_;
}

RunStats run_trace(const TraceImage& trace, const SimConfig& cfg, CacheHierarchy& caches, RunObserver* observer)
{
  auto report = validate_records(trace.header, trace.records);
  if (!report.ok())
    throw TraceError("trace does not validate: " + report.violations.front().rule + " at record " +
                     std::to_string(report.violations.front().ordinal) + " (" + std::to_string(report.violations.size()) + " violation(s))");
  SimCore core(trace, cfg, caches, observer);
  return core.finish();
}

RunStats run_trace(const TraceImage& trace, const SimConfig& cfg, RunObserver* observer)
{
  CacheHierarchy caches(cfg.caches);
  return run_trace(trace, cfg, caches, observer);
}

TraceImage make_image(const TraceHeader& header, std::vector<TraceRecord> records)
{
  TraceImage img;
  img.header = header;
  img.header.record_count = records.size();
  img.records = std::move(records);

  unsigned char buf[kRecordBytes];
  encode_header(img.header, buf);
  uint64_t h = fnv1a(buf, kHeaderBytes);
  for (const auto& rec : img.records) {
    encode_record(rec, buf);
    h = fnv1a(buf, kRecordBytes, h);
  }
  img.content_hash = h;
  return img;
}

} // namespace wpsim
