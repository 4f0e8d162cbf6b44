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

#include "wpsim/cache.hpp"

#include <algorithm>

namespace wpsim {

const char* to_string(AccessKind k)
{
  switch (k) {
  case AccessKind::ifetch:
    return "ifetch";
  case AccessKind::load:
    return "load";
  case AccessKind::store_addr:
    return "store_addr";
  case AccessKind::prefetch:
    return "prefetch";
  }
  return "?";
}

const char* to_string(Attribution a) { return a == Attribution::cp ? "cp" : "wp"; }

const char* to_string(FillOrigin o)
{
  switch (o) {
  case FillOrigin::cp_demand:
    return "cp_demand";
  case FillOrigin::wp_demand:
    return "wp_demand";
  case FillOrigin::ftq_prefetch_cp:
    return "ftq_prefetch_cp";
  case FillOrigin::ftq_prefetch_wp:
    return "ftq_prefetch_wp";
  }
  return "?";
}

void CacheLevelConfig::validate() const
{
  if (ways == 0 || size_bytes == 0 || latency == 0 || mshr_entries == 0)
    throw CacheError(name + ": size, ways, latency and mshr_entries must be nonzero");
  if (size_bytes % (ways * kLineBytes) != 0)
    throw CacheError(name + ": size must be divisible by ways * 64");
}

uint64_t LevelStats::total_hits() const
{
  uint64_t n = 0;
  for (auto& k : hits)
    for (auto v : k)
      n += v;
  return n;
}

uint64_t LevelStats::total_misses() const
{
  uint64_t n = 0;
  for (auto& k : misses)
    for (auto v : k)
      n += v;
  return n;
}

namespace {

FillOrigin origin_for(AccessKind kind, Attribution attr)
{
  if (kind == AccessKind::prefetch)
    return attr == Attribution::wp ? FillOrigin::ftq_prefetch_wp : FillOrigin::ftq_prefetch_cp;
  return attr == Attribution::wp ? FillOrigin::wp_demand : FillOrigin::cp_demand;
}

} // namespace

CacheLevel::CacheLevel(const CacheLevelConfig& cfg, CacheLevel* next, uint64_t memory_latency)
    : cfg_(cfg), next_(next), memory_latency_(memory_latency)
{
  cfg_.validate();
  lines_.assign(cfg_.sets() * cfg_.ways, Line{});
  mshr_.assign(cfg_.mshr_entries, Mshr{});
}

CacheLevel::Line* CacheLevel::lookup(uint64_t line_addr)
{
  uint64_t set = line_addr % cfg_.sets();
  uint64_t tag = line_addr / cfg_.sets();
  Line* base = &lines_[set * cfg_.ways];
  for (uint64_t w = 0; w < cfg_.ways; w++)
    if (base[w].valid && base[w].tag == tag)
      return &base[w];
  return nullptr;
}

int CacheLevel::mshr_find(uint64_t line_addr) const
{
  for (size_t i = 0; i < mshr_.size(); i++)
    if (mshr_[i].valid && mshr_[i].line_addr == line_addr)
      return static_cast<int>(i);
  return -1;
}

void CacheLevel::install(const Mshr& m)
{
  uint64_t set = m.line_addr % cfg_.sets();
  uint64_t tag = m.line_addr / cfg_.sets();
  Line* base = &lines_[set * cfg_.ways];

  Line* victim = nullptr;
  for (uint64_t w = 0; w < cfg_.ways; w++) {
    if (!base[w].valid) {
      victim = &base[w];
      break;
    }
    if (!victim || base[w].lru < victim->lru)
      victim = &base[w];
  }

  if (victim->valid) {
    stats_.evictions++;
    bool wp_unused = is_wp_origin(victim->origin) && !victim->used_by_cp;
    if (wp_unused)
      stats_.useless_wp_fills++;
    if (on_evict)
      on_evict(victim->tag * cfg_.sets() + set, wp_unused);
  }

  victim->valid = true;
  victim->tag = tag;
  victim->lru = ++lru_clock_;
  victim->origin = m.origin;
  victim->used_by_cp = false;
  stats_.fills[static_cast<size_t>(m.origin)]++;
}

void CacheLevel::drain(uint64_t cycle)
{
  if (mshr_live_ == 0)
    return;
  // install completed fills in (ready, allocation) order
  while (true) {
    int best = -1;
    for (size_t i = 0; i < mshr_.size(); i++) {
      const Mshr& m = mshr_[i];
      if (!m.valid || m.ready > cycle)
        continue;
      if (best < 0 || m.ready < mshr_[best].ready || (m.ready == mshr_[best].ready && m.seq < mshr_[best].seq))
        best = static_cast<int>(i);
    }
    if (best < 0)
      return;
    install(mshr_[best]);
    mshr_[best].valid = false;
    mshr_live_--;
  }
}

AccessResult CacheLevel::access(uint64_t addr, AccessKind kind, Attribution attr, uint64_t cycle)
{
  drain(cycle);

  uint64_t line_addr = addr / kLineBytes;
  size_t k = static_cast<size_t>(kind);
  size_t a = static_cast<size_t>(attr);

  if (Line* line = lookup(line_addr)) {
    line->lru = ++lru_clock_;
    if (attr == Attribution::cp && is_wp_origin(line->origin) && !line->used_by_cp) {
      line->used_by_cp = true; // latches on the first CP touch only
      stats_.useful_wp_fills++;
    }
    stats_.hits[k][a]++;
    return {true, false, cfg_.latency};
  }

  if (int m = mshr_find(line_addr); m >= 0) {
    // merged into an in-flight fill; the fill keeps the first requester's origin
    stats_.misses[k][a]++;
    stats_.mshr_merges++;
    uint64_t remain = mshr_[m].ready > cycle ? mshr_[m].ready - cycle : 1;
    return {false, false, remain};
  }

  if (mshr_live_ == mshr_.size()) {
    if (kind == AccessKind::prefetch) {
      stats_.prefetch_drops++;
      return {false, true, 0};
    }
    return {false, true, 0}; // caller stalls and retries next cycle
  }

  stats_.misses[k][a]++;

  uint64_t below;
  if (next_) {
    AccessResult r = next_->access(addr, kind, attr, cycle);
    while (r.retry) {
      // lower-level MSHR pressure shows up as extra latency here rather than
      // unwinding the whole access chain
      cycle++;
      r = next_->access(addr, kind, attr, cycle);
    }
    below = r.latency;
  } else {
    below = memory_latency_;
  }

  uint64_t total = cfg_.latency + below;
  for (auto& m : mshr_) {
    if (!m.valid) {
      m.valid = true;
      m.line_addr = line_addr;
      m.ready = cycle + total;
      m.seq = ++fill_seq_;
      m.origin = origin_for(kind, attr);
      mshr_live_++;
      break;
    }
  }
  return {false, false, total};
}

LevelStats CacheLevel::snapshot(uint64_t cycle)
{
  drain(cycle);
  LevelStats out = stats_;
  out.wp_resident_unused = 0;
  for (const auto& line : lines_)
    if (line.valid && is_wp_origin(line.origin) && !line.used_by_cp)
      out.wp_resident_unused++;
  return out;
}

void CacheLevel::reset_stats() { stats_ = LevelStats{}; }

CacheHierarchy::CacheHierarchy(const HierarchyConfig& cfg)
    : llc_(cfg.llc, nullptr, cfg.memory_latency), l2_(cfg.l2, &llc_, cfg.memory_latency), l1i_(cfg.l1i, &l2_, cfg.memory_latency),
      l1d_(cfg.l1d, &l2_, cfg.memory_latency)
{
}

AccessResult CacheHierarchy::ifetch(uint64_t addr, Attribution attr, uint64_t cycle)
{
  return l1i_.access(addr, AccessKind::ifetch, attr, cycle);
}

AccessResult CacheHierarchy::data(uint64_t addr, AccessKind kind, Attribution attr, uint64_t cycle)
{
  return l1d_.access(addr, kind, attr, cycle);
}

size_t CacheHierarchy::ftq_prefetch(const std::vector<uint64_t>& blocks, Attribution attr, uint64_t cycle)
{
  size_t issued = 0;
  for (uint64_t b : blocks) {
    AccessResult r = l1i_.access(b, AccessKind::prefetch, attr, cycle);
    if (!r.retry)
      issued++;
  }
  return issued;
}

CacheLevel& CacheHierarchy::level(const std::string& name)
{
  if (name == "l1i")
    return l1i_;
  if (name == "l1d")
    return l1d_;
  if (name == "l2")
    return l2_;
  if (name == "llc")
    return llc_;
  throw CacheError("unknown cache level: " + name);
}

LevelStats CacheHierarchy::snapshot(const std::string& name, uint64_t cycle) { return level(name).snapshot(cycle); }

void CacheHierarchy::reset_stats()
{
  l1i_.reset_stats();
  l1d_.reset_stats();
  l2_.reset_stats();
  llc_.reset_stats();
}

} // namespace wpsim
