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

#include "wpsim/bpu.hpp"

#include <cassert>
#include <cmath>

namespace wpsim {

namespace {

constexpr size_t kHistBufferBits = 4096;

bool is_pow2(uint64_t v) { return v && !(v & (v - 1)); }

uint32_t log2u(uint64_t v)
{
  uint32_t r = 0;
  while (v > 1) {
    v >>= 1;
    r++;
  }
  return r;
}

void sat_update(uint8_t& ctr, bool up, uint8_t max)
{
  if (up && ctr < max)
    ctr++;
  if (!up && ctr > 0)
    ctr--;
}

} // namespace

BranchPredictor::BranchPredictor(const BpuConfig& cfg) : cfg_(cfg), ghist_(kHistBufferBits, 0)
{
  if (cfg_.tage_tagged_tables > kMaxTageTables)
    throw BpuError("too many TAGE tables (max " + std::to_string(kMaxTageTables) + ")");
  if (cfg_.ittage_tables > kMaxIttageTables)
    throw BpuError("too many ITTAGE tables (max " + std::to_string(kMaxIttageTables) + ")");
  if (!is_pow2(cfg_.bimodal_entries) || !is_pow2(cfg_.tage_entries_per_table) || !is_pow2(cfg_.ittage_entries_per_table))
    throw BpuError("predictor table sizes must be powers of two");
  if (!is_pow2(cfg_.btb_entries) || cfg_.btb_ways == 0 || cfg_.btb_entries % cfg_.btb_ways != 0)
    throw BpuError("BTB geometry invalid");
  if (cfg_.ras_depth == 0)
    throw BpuError("RAS depth must be nonzero");

  bimodal_.assign(cfg_.bimodal_entries, 1); // weakly not-taken

  tage_.assign(cfg_.tage_tagged_tables, std::vector<TageEntry>(cfg_.tage_entries_per_table));
  tage_hist_len_.resize(cfg_.tage_tagged_tables);
  for (size_t i = 0; i < cfg_.tage_tagged_tables; i++) {
    double len = static_cast<double>(cfg_.tage_hist_l1) * std::pow(cfg_.tage_hist_ratio, static_cast<double>(i));
    uint32_t l = std::max<uint32_t>(1, static_cast<uint32_t>(len));
    if (i > 0)
      l = std::max(l, tage_hist_len_[i - 1] + 1); // strictly increasing
    tage_hist_len_[i] = l;
    tage_folds_[3 * i + 0].init(l, log2u(cfg_.tage_entries_per_table));
    tage_folds_[3 * i + 1].init(l, static_cast<uint32_t>(cfg_.tage_tag_bits));
    tage_folds_[3 * i + 2].init(l, static_cast<uint32_t>(cfg_.tage_tag_bits) - 1);
  }

  ittage_.assign(cfg_.ittage_tables, std::vector<IttageEntry>(cfg_.ittage_entries_per_table));
  ittage_hist_len_.resize(cfg_.ittage_tables);
  for (size_t i = 0; i < cfg_.ittage_tables; i++) {
    double len = static_cast<double>(cfg_.ittage_hist_l1) * std::pow(cfg_.ittage_hist_ratio, static_cast<double>(i));
    uint32_t l = std::max<uint32_t>(1, static_cast<uint32_t>(len));
    if (i > 0)
      l = std::max(l, ittage_hist_len_[i - 1] + 1);
    ittage_hist_len_[i] = l;
    ittage_folds_[3 * i + 0].init(l, log2u(cfg_.ittage_entries_per_table));
    ittage_folds_[3 * i + 1].init(l, static_cast<uint32_t>(cfg_.ittage_tag_bits));
    ittage_folds_[3 * i + 2].init(l, static_cast<uint32_t>(cfg_.ittage_tag_bits) - 1);
  }

  btb_.assign(cfg_.btb_entries, BtbEntry{});
  ras_.assign(cfg_.ras_depth, 0);
}

size_t BranchPredictor::tage_index(size_t t, uint64_t pc) const
{
  uint32_t lg = log2u(cfg_.tage_entries_per_table);
  uint64_t path = path_hist_ & ((1ull << std::min<uint32_t>(tage_hist_len_[t], 16)) - 1);
  uint64_t idx = (pc >> 2) ^ (pc >> (2 + lg)) ^ tage_folds_[3 * t + 0].comp ^ (path << 1) ^ (path >> 3) ^ t;
  return idx & (cfg_.tage_entries_per_table - 1);
}

uint16_t BranchPredictor::tage_tag(size_t t, uint64_t pc) const
{
  uint64_t tag = (pc >> 2) ^ tage_folds_[3 * t + 1].comp ^ (static_cast<uint64_t>(tage_folds_[3 * t + 2].comp) << 1);
  return static_cast<uint16_t>(tag & ((1ull << cfg_.tage_tag_bits) - 1));
}

size_t BranchPredictor::ittage_index(size_t t, uint64_t pc) const
{
  uint32_t lg = log2u(cfg_.ittage_entries_per_table);
  uint64_t idx = (pc >> 2) ^ (pc >> (2 + lg)) ^ ittage_folds_[3 * t + 0].comp ^ (path_hist_ & 0xff) ^ t;
  return idx & (cfg_.ittage_entries_per_table - 1);
}

uint16_t BranchPredictor::ittage_tag(size_t t, uint64_t pc) const
{
  uint64_t tag = (pc >> 2) ^ ittage_folds_[3 * t + 1].comp ^ (static_cast<uint64_t>(ittage_folds_[3 * t + 2].comp) << 1);
  return static_cast<uint16_t>(tag & ((1ull << cfg_.ittage_tag_bits) - 1));
}

std::pair<bool, uint64_t> BranchPredictor::btb_lookup(uint64_t pc) const
{
  size_t sets = cfg_.btb_entries / cfg_.btb_ways;
  size_t set = (pc >> 2) & (sets - 1);
  uint64_t tag = pc >> (2 + log2u(sets));
  for (size_t w = 0; w < cfg_.btb_ways; w++) {
    const BtbEntry& e = btb_[set * cfg_.btb_ways + w];
    if (e.valid && e.tag == tag)
      return {true, e.target};
  }
  return {false, 0};
}

void BranchPredictor::btb_update(uint64_t pc, uint64_t target, OpClass cls)
{
  size_t sets = cfg_.btb_entries / cfg_.btb_ways;
  size_t set = (pc >> 2) & (sets - 1);
  uint64_t tag = pc >> (2 + log2u(sets));
  lru_clock_++;

  size_t victim = 0;
  uint64_t victim_lru = UINT64_MAX;
  for (size_t w = 0; w < cfg_.btb_ways; w++) {
    BtbEntry& e = btb_[set * cfg_.btb_ways + w];
    if (e.valid && e.tag == tag) {
      e.target = target;
      e.cls = cls;
      e.lru = lru_clock_;
      return;
    }
    if (!e.valid) {
      victim = w;
      victim_lru = 0;
    } else if (e.lru < victim_lru) {
      victim = w;
      victim_lru = e.lru;
    }
  }
  BtbEntry& e = btb_[set * cfg_.btb_ways + victim];
  e.valid = true;
  e.tag = tag;
  e.target = target;
  e.cls = cls;
  e.lru = lru_clock_;
}

void BranchPredictor::push_history(bool taken, uint64_t pc)
{
  hist_ptr_ = (hist_ptr_ - 1) & (kHistBufferBits - 1);
  ghist_[hist_ptr_] = taken ? 1 : 0;
  path_hist_ = (path_hist_ << 1) | ((pc >> 2) & 1);
  for (size_t i = 0; i < cfg_.tage_tagged_tables; i++)
    for (int k = 0; k < 3; k++)
      tage_folds_[3 * i + k].update(ghist_, hist_ptr_);
  for (size_t i = 0; i < cfg_.ittage_tables; i++)
    for (int k = 0; k < 3; k++)
      ittage_folds_[3 * i + k].update(ghist_, hist_ptr_);
}

uint64_t BranchPredictor::ras_peek(bool& valid) const
{
  valid = ras_count_ > 0;
  return valid ? ras_[ras_top_] : 0;
}

void BranchPredictor::ras_push(uint64_t addr)
{
  ras_top_ = (ras_top_ + 1) % cfg_.ras_depth;
  ras_[ras_top_] = addr;
  if (ras_count_ < cfg_.ras_depth)
    ras_count_++; // on overflow the oldest entry is silently overwritten
}

void BranchPredictor::ras_pop()
{
  if (ras_count_ == 0)
    return;
  ras_top_ = (ras_top_ + cfg_.ras_depth - 1) % cfg_.ras_depth;
  ras_count_--;
}

Prediction BranchPredictor::predict(uint64_t pc, OpClass cls, bool actual_taken, uint64_t actual_target)
{
  Prediction p;
  uint64_t fall = pc + 4;

  switch (cls) {
  case OpClass::cond_branch: {
    // provider = longest-history tag hit, alt = next hit or the base table
    int provider = -1, alt = -1;
    for (int t = static_cast<int>(cfg_.tage_tagged_tables) - 1; t >= 0; t--) {
      const TageEntry& e = tage_[t][tage_index(t, pc)];
      if (e.valid && e.tag == tage_tag(t, pc)) {
        if (provider < 0)
          provider = t;
        else {
          alt = t;
          break;
        }
      }
    }
    bool base_taken = bimodal_[(pc >> 2) & (cfg_.bimodal_entries - 1)] >= 2;
    bool provider_taken = base_taken, alt_taken = base_taken;
    if (provider >= 0)
      provider_taken = tage_[provider][tage_index(provider, pc)].ctr >= 4;
    if (alt >= 0)
      alt_taken = tage_[alt][tage_index(alt, pc)].ctr >= 4;

    p.provider = provider;
    p.alt = alt;
    p.provider_taken = provider_taken;
    p.alt_taken = alt_taken;

    bool dir = provider_taken;
    if (provider >= 0) {
      const TageEntry& e = tage_[provider][tage_index(provider, pc)];
      bool weak_new = (e.ctr == 3 || e.ctr == 4) && e.u == 0;
      if (weak_new && use_alt_on_na_ >= 8) {
        dir = alt_taken;
        p.used_alt = true;
      }
    }

    p.taken = dir;
    if (dir) {
      auto [hit, target] = btb_lookup(pc);
      p.btb_hit = hit;
      if (hit) {
        p.target = target;
      } else {
        p.taken = false; // no target available: fall through
        p.target = fall;
      }
    } else {
      p.target = fall;
    }
    break;
  }
  case OpClass::uncond_direct:
  case OpClass::call_direct: {
    auto [hit, target] = btb_lookup(pc);
    p.btb_hit = hit;
    if (hit) {
      p.taken = true;
      p.target = target;
    } else {
      p.taken = false;
      p.target = fall;
    }
    break;
  }
  case OpClass::uncond_indirect:
  case OpClass::call_indirect: {
    int provider = -1;
    for (int t = static_cast<int>(cfg_.ittage_tables) - 1; t >= 0; t--) {
      const IttageEntry& e = ittage_[t][ittage_index(t, pc)];
      if (e.valid && e.tag == ittage_tag(t, pc)) {
        provider = t;
        break;
      }
    }
    p.provider = provider;
    if (provider >= 0 && ittage_[provider][ittage_index(provider, pc)].ctr >= 1) {
      p.taken = true;
      p.target = ittage_[provider][ittage_index(provider, pc)].target;
    } else {
      auto [hit, target] = btb_lookup(pc);
      p.btb_hit = hit;
      if (hit) {
        p.taken = true;
        p.target = target;
      } else {
        p.taken = false;
        p.target = fall;
      }
    }
    break;
  }
  case OpClass::ret: {
    bool valid = false;
    uint64_t top = ras_peek(valid);
    if (valid) {
      p.taken = true;
      p.target = top;
    } else {
      p.taken = false; // underflow: fall through
      p.target = fall;
    }
    break;
  }
  default:
    throw BpuError("predict called with non-branch op_class");
  }

  p.mispredicted = (p.taken != actual_taken) || (p.taken && actual_taken && p.target != actual_target);
  return p;
}

void BranchPredictor::on_predicted(uint64_t pc, OpClass cls, bool taken, uint64_t target)
{
  push_history(taken, pc);
  if (is_call(cls))
    ras_push(pc + 4);
  else if (cls == OpClass::ret)
    ras_pop();
  (void)target;
}

void BranchPredictor::update_direction(uint64_t pc, const Prediction& pred, bool taken)
{
  update_ticks_++;
  if ((update_ticks_ & ((1ull << 18) - 1)) == 0) {
    for (auto& table : tage_)
      for (auto& e : table)
        e.u >>= 1; // periodic graceful decay
  }

  bool final_pred = pred.used_alt ? pred.alt_taken : pred.provider_taken;
  bool base_is_final = pred.used_alt ? (pred.alt < 0) : (pred.provider < 0);

  // use-alt chooser: trained on weak newly-allocated providers
  if (pred.provider >= 0) {
    TageEntry& e = tage_[pred.provider][tage_index(pred.provider, pc)];
    bool weak_new = (e.ctr == 3 || e.ctr == 4) && e.u == 0;
    if (weak_new && pred.provider_taken != pred.alt_taken) {
      if (pred.alt_taken == taken && use_alt_on_na_ < 15)
        use_alt_on_na_++;
      if (pred.provider_taken == taken && use_alt_on_na_ > 0)
        use_alt_on_na_--;
    }
  }

  if (pred.provider >= 0) {
    TageEntry& e = tage_[pred.provider][tage_index(pred.provider, pc)];
    sat_update(e.ctr, taken, 7);
    if (pred.provider_taken != pred.alt_taken) {
      if (pred.provider_taken == taken)
        sat_update(e.u, true, 3);
      else
        sat_update(e.u, false, 3);
    }
  }
  if (base_is_final) {
    uint8_t& ctr = bimodal_[(pc >> 2) & (cfg_.bimodal_entries - 1)];
    sat_update(ctr, taken, 3);
  }

  // allocate on a final mispredict, in a longer-history table with a free u
  if (final_pred != taken && pred.provider + 1 < static_cast<int>(cfg_.tage_tagged_tables)) {
    alloc_seed_ = alloc_seed_ * 6364136223846793005ULL + 1442695040888963407ULL;
    int start = pred.provider + 1 + static_cast<int>((alloc_seed_ >> 33) & 1);
    start = std::min(start, static_cast<int>(cfg_.tage_tagged_tables) - 1);
    bool allocated = false;
    for (int t = start; t < static_cast<int>(cfg_.tage_tagged_tables); t++) {
      TageEntry& e = tage_[t][tage_index(t, pc)];
      if (!e.valid || e.u == 0) {
        e.valid = true;
        e.tag = tage_tag(t, pc);
        e.ctr = taken ? 4 : 3;
        e.u = 0;
        allocated = true;
        break;
      }
    }
    if (!allocated) {
      for (int t = pred.provider + 1; t < static_cast<int>(cfg_.tage_tagged_tables); t++)
        sat_update(tage_[t][tage_index(t, pc)].u, false, 3);
    }
  }
}

void BranchPredictor::update_indirect(uint64_t pc, const Prediction& pred, uint64_t target)
{
  bool correct = pred.taken && pred.target == target;
  if (pred.provider >= 0) {
    IttageEntry& e = ittage_[pred.provider][ittage_index(pred.provider, pc)];
    if (e.target == target) {
      sat_update(e.ctr, true, 3);
      sat_update(e.u, true, 3);
    } else {
      if (e.ctr > 0)
        e.ctr--;
      else {
        e.target = target;
        e.ctr = 1;
      }
      sat_update(e.u, false, 3);
    }
  }
  if (!correct && pred.provider + 1 < static_cast<int>(cfg_.ittage_tables)) {
    for (int t = pred.provider + 1; t < static_cast<int>(cfg_.ittage_tables); t++) {
      IttageEntry& e = ittage_[t][ittage_index(t, pc)];
      if (!e.valid || e.u == 0) {
        e.valid = true;
        e.tag = ittage_tag(t, pc);
        e.target = target;
        e.ctr = 1;
        e.u = 0;
        break;
      }
      sat_update(e.u, false, 3);
    }
  }
}

void BranchPredictor::update(uint64_t pc, OpClass cls, const Prediction& pred, bool taken, uint64_t target)
{
  switch (cls) {
  case OpClass::cond_branch:
    update_direction(pc, pred, taken);
    break;
  case OpClass::uncond_indirect:
  case OpClass::call_indirect:
    update_indirect(pc, pred, target);
    break;
  case OpClass::uncond_direct:
  case OpClass::call_direct:
  case OpClass::ret:
    break;
  default:
    throw BpuError("update called with non-branch op_class");
  }

  if (taken)
    btb_update(pc, target, cls);

  if (!cfg_.speculative_history) {
    push_history(taken, pc);
    if (is_call(cls))
      ras_push(pc + 4);
    else if (cls == OpClass::ret)
      ras_pop();
  }
}

HistoryToken BranchPredictor::history_checkpoint()
{
  HistoryToken t;
  t.seq = ++token_seq_;
  max_valid_token_ = t.seq;
  t.hist_ptr = hist_ptr_;
  t.path_hist = path_hist_;
  for (size_t i = 0; i < 3 * cfg_.tage_tagged_tables; i++)
    t.tage_folds[i] = tage_folds_[i].comp;
  for (size_t i = 0; i < 3 * cfg_.ittage_tables; i++)
    t.ittage_folds[i] = ittage_folds_[i].comp;
  t.ras_top = ras_top_;
  t.ras_count = ras_count_;
  return t;
}

void BranchPredictor::history_restore(const HistoryToken& token)
{
  if (token.seq > max_valid_token_)
    throw BpuError("stale history token (newer than the last restored point)");
  max_valid_token_ = token.seq;
  hist_ptr_ = token.hist_ptr;
  path_hist_ = token.path_hist;
  for (size_t i = 0; i < 3 * cfg_.tage_tagged_tables; i++)
    tage_folds_[i].comp = token.tage_folds[i];
  for (size_t i = 0; i < 3 * cfg_.ittage_tables; i++)
    ittage_folds_[i].comp = token.ittage_folds[i];
  ras_top_ = token.ras_top;
  ras_count_ = token.ras_count;
}

void BranchPredictor::append_outcome(uint64_t pc, OpClass cls, bool taken)
{
  push_history(taken, pc);
  if (is_call(cls))
    ras_push(pc + 4);
  else if (cls == OpClass::ret)
    ras_pop();
}

} // namespace wpsim
