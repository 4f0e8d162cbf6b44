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

#ifndef WPSIM_TESTS_REFERENCE_TAGE_HPP
#define WPSIM_TESTS_REFERENCE_TAGE_HPP

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

namespace wpsim::test {

// Reference TAGE for the conditional-direction path, recomputed from first
// principles on every prediction: explicit history sequences and direct
// folds instead of circular buffers and incremental folded registers. The
// production predictor must match it prediction for prediction.
//
// History fold definition shared by both sides: with h[0] the newest of the
// L most recent bits, fold(L, w) = XOR over i of h[i] << (i % w).
class ReferenceTage
{
public:
  struct Geometry {
    size_t tagged_tables = 8;
    size_t entries_per_table = 2048;
    uint32_t tag_bits = 11;
    uint32_t hist_l1 = 4;
    double hist_ratio = 1.7;
    size_t bimodal_entries = 16384;
  };

  explicit ReferenceTage(const Geometry& g) : g_(g), bimodal_(g.bimodal_entries, 1)
  {
    tables_.assign(g_.tagged_tables, std::vector<Entry>(g_.entries_per_table));
    hist_len_.resize(g_.tagged_tables);
    for (size_t i = 0; i < g_.tagged_tables; i++) {
      double len = static_cast<double>(g_.hist_l1) * std::pow(g_.hist_ratio, static_cast<double>(i));
      uint32_t l = std::max<uint32_t>(1, static_cast<uint32_t>(len));
      if (i > 0)
        l = std::max(l, hist_len_[i - 1] + 1);
      hist_len_[i] = l;
    }
  }

  bool predict(uint64_t pc)
  {
    provider_ = alt_ = -1;
    for (int t = static_cast<int>(g_.tagged_tables) - 1; t >= 0; t--) {
      const Entry& e = tables_[t][index(t, pc)];
      if (e.valid && e.tag == tag(t, pc)) {
        if (provider_ < 0)
          provider_ = t;
        else {
          alt_ = t;
          break;
        }
      }
    }
    bool base = bimodal_[(pc >> 2) & (g_.bimodal_entries - 1)] >= 2;
    provider_taken_ = base;
    alt_taken_ = base;
    if (provider_ >= 0)
      provider_taken_ = tables_[provider_][index(provider_, pc)].ctr >= 4;
    if (alt_ >= 0)
      alt_taken_ = tables_[alt_][index(alt_, pc)].ctr >= 4;

    used_alt_ = false;
    bool dir = provider_taken_;
    if (provider_ >= 0) {
      const Entry& e = tables_[provider_][index(provider_, pc)];
      bool weak_new = (e.ctr == 3 || e.ctr == 4) && e.u == 0;
      if (weak_new && use_alt_on_na_ >= 8) {
        dir = alt_taken_;
        used_alt_ = true;
      }
    }
    return dir;
  }

  // Must be called right after predict(pc) for the same pc.
  void update(uint64_t pc, bool taken)
  {
    update_ticks_++;
    if ((update_ticks_ & ((1ull << 18) - 1)) == 0)
      for (auto& table : tables_)
        for (auto& e : table)
          e.u >>= 1;

    bool final_pred = used_alt_ ? alt_taken_ : provider_taken_;
    bool base_is_final = used_alt_ ? (alt_ < 0) : (provider_ < 0);

    if (provider_ >= 0) {
      Entry& e = tables_[provider_][index(provider_, pc)];
      bool weak_new = (e.ctr == 3 || e.ctr == 4) && e.u == 0;
      if (weak_new && provider_taken_ != alt_taken_) {
        if (alt_taken_ == taken && use_alt_on_na_ < 15)
          use_alt_on_na_++;
        if (provider_taken_ == taken && use_alt_on_na_ > 0)
          use_alt_on_na_--;
      }
    }

    if (provider_ >= 0) {
      Entry& e = tables_[provider_][index(provider_, pc)];
      if (taken && e.ctr < 7)
        e.ctr++;
      if (!taken && e.ctr > 0)
        e.ctr--;
      if (provider_taken_ != alt_taken_) {
        if (provider_taken_ == taken && e.u < 3)
          e.u++;
        if (provider_taken_ != taken && e.u > 0)
          e.u--;
      }
    }
    if (base_is_final) {
      uint8_t& ctr = bimodal_[(pc >> 2) & (g_.bimodal_entries - 1)];
      if (taken && ctr < 3)
        ctr++;
      if (!taken && ctr > 0)
        ctr--;
    }

    if (final_pred != taken && provider_ + 1 < static_cast<int>(g_.tagged_tables)) {
      alloc_seed_ = alloc_seed_ * 6364136223846793005ULL + 1442695040888963407ULL;
      int start = provider_ + 1 + static_cast<int>((alloc_seed_ >> 33) & 1);
      start = std::min(start, static_cast<int>(g_.tagged_tables) - 1);
      bool allocated = false;
      for (int t = start; t < static_cast<int>(g_.tagged_tables); t++) {
        Entry& e = tables_[t][index(t, pc)];
        if (!e.valid || e.u == 0) {
          e.valid = true;
          e.tag = tag(t, pc);
          e.ctr = taken ? 4 : 3;
          e.u = 0;
          allocated = true;
          break;
        }
      }
      if (!allocated) {
        for (int t = provider_ + 1; t < static_cast<int>(g_.tagged_tables); t++) {
          Entry& e = tables_[t][index(t, pc)];
          if (e.u > 0)
            e.u--;
        }
      }
    }

    // history append (the standalone predictor appends the actual outcome)
    ghist_.push_front(taken ? 1 : 0);
    if (ghist_.size() > 4096)
      ghist_.pop_back();
    path_hist_ = (path_hist_ << 1) | ((pc >> 2) & 1);
  }

private:
  struct Entry {
    bool valid = false;
    uint16_t tag = 0;
    uint8_t ctr = 0;
    uint8_t u = 0;
  };

  uint32_t fold(uint32_t length, uint32_t width) const
  {
    uint32_t f = 0;
    for (uint32_t i = 0; i < length && i < ghist_.size(); i++)
      f ^= static_cast<uint32_t>(ghist_[i]) << (i % width);
    return f & ((width >= 32) ? 0xffffffffu : ((1u << width) - 1));
  }

  static uint32_t log2u(uint64_t v)
  {
    uint32_t r = 0;
    while (v > 1) {
      v >>= 1;
      r++;
    }
    return r;
  }

  size_t index(size_t t, uint64_t pc) const
  {
    uint32_t lg = log2u(g_.entries_per_table);
    uint64_t path = path_hist_ & ((1ull << std::min<uint32_t>(hist_len_[t], 16)) - 1);
    uint64_t idx = (pc >> 2) ^ (pc >> (2 + lg)) ^ fold(hist_len_[t], lg) ^ (path << 1) ^ (path >> 3) ^ t;
    return idx & (g_.entries_per_table - 1);
  }

  uint16_t tag(size_t t, uint64_t pc) const
  {
    uint64_t v = (pc >> 2) ^ fold(hist_len_[t], g_.tag_bits) ^ (static_cast<uint64_t>(fold(hist_len_[t], g_.tag_bits - 1)) << 1);
    return static_cast<uint16_t>(v & ((1ull << g_.tag_bits) - 1));
  }

  Geometry g_;
  std::vector<uint8_t> bimodal_;
  std::vector<std::vector<Entry>> tables_;
  std::vector<uint32_t> hist_len_;
  std::deque<int> ghist_; // newest first
  uint64_t path_hist_ = 0;

  int provider_ = -1;
  int alt_ = -1;
  bool provider_taken_ = false;
  bool alt_taken_ = false;
  bool used_alt_ = false;
  int8_t use_alt_on_na_ = 8;
  uint64_t alloc_seed_ = 0x5a17;
  uint64_t update_ticks_ = 0;
};

} // namespace wpsim::test

#endif
