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

#ifndef WPSIM_CACHE_HPP
#define WPSIM_CACHE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpsim {

struct CacheError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr uint64_t kLineBytes = 64;

enum class AccessKind : uint8_t { ifetch = 0, load = 1, store_addr = 2, prefetch = 3 };
enum class Attribution : uint8_t { cp = 0, wp = 1 };
enum class FillOrigin : uint8_t { cp_demand = 0, wp_demand = 1, ftq_prefetch_cp = 2, ftq_prefetch_wp = 3 };

constexpr size_t kAccessKinds = 4;
constexpr size_t kAttributions = 2;
constexpr size_t kFillOrigins = 4;

constexpr bool is_wp_origin(FillOrigin o) { return o == FillOrigin::wp_demand || o == FillOrigin::ftq_prefetch_wp; }

const char* to_string(AccessKind k);
const char* to_string(Attribution a);
const char* to_string(FillOrigin o);

struct CacheLevelConfig {
  std::string name;
  uint64_t size_bytes = 0;
  uint64_t ways = 0;
  uint64_t latency = 0;
  uint64_t mshr_entries = 8;

  uint64_t sets() const { return size_bytes / (ways * kLineBytes); }
  void validate() const;
};

struct AccessResult {
  bool hit = false;
  bool retry = false;    // MSHR full: retry next cycle, nothing was counted
  uint64_t latency = 0;  // total cycles until data is available
};

struct LevelStats {
  std::array<std::array<uint64_t, kAttributions>, kAccessKinds> hits{};
  std::array<std::array<uint64_t, kAttributions>, kAccessKinds> misses{};
  std::array<uint64_t, kFillOrigins> fills{};
  uint64_t useful_wp_fills = 0;  // WP-origin line first touched by a CP access
  uint64_t useless_wp_fills = 0; // WP-origin line evicted untouched
  uint64_t wp_resident_unused = 0; // filled in by snapshot()
  uint64_t evictions = 0;
  uint64_t mshr_merges = 0;
  uint64_t prefetch_drops = 0;

  uint64_t total_hits() const;
  uint64_t total_misses() const;
  uint64_t total_wp_origin_fills() const
  {
    return fills[static_cast<size_t>(FillOrigin::wp_demand)] + fills[static_cast<size_t>(FillOrigin::ftq_prefetch_wp)];
  }
};

// One set-associative, LRU, write-allocate cache level with per-line
// wrong-path provenance and a simple MSHR file. Fills install at their
// ready cycle (drained lazily on the next access or snapshot).
class CacheLevel
{
public:
  CacheLevel(const CacheLevelConfig& cfg, CacheLevel* next, uint64_t memory_latency);

  // `cycle` must be monotonically non-decreasing across calls.
  AccessResult access(uint64_t addr, AccessKind kind, Attribution attr, uint64_t cycle);

  LevelStats snapshot(uint64_t cycle); // drains fills ready by `cycle`
  void reset_stats();

  const CacheLevelConfig& config() const { return cfg_; }
  uint64_t mshr_in_use() const { return mshr_live_; }

  // test hook: observes evictions in order (line address, was-wp-unused)
  std::function<void(uint64_t, bool)> on_evict;

private:
  struct Line {
    bool valid = false;
    uint64_t tag = 0;
    uint64_t lru = 0;
    FillOrigin origin = FillOrigin::cp_demand;
    bool used_by_cp = false;
  };
  struct Mshr {
    bool valid = false;
    uint64_t line_addr = 0;
    uint64_t ready = 0;
    uint64_t seq = 0;
    FillOrigin origin = FillOrigin::cp_demand;
  };

  void drain(uint64_t cycle);
  void install(const Mshr& m);
  Line* lookup(uint64_t line_addr);
  int mshr_find(uint64_t line_addr) const;

  CacheLevelConfig cfg_;
  CacheLevel* next_; // nullptr = memory
  uint64_t memory_latency_;

  std::vector<Line> lines_; // sets * ways
  std::vector<Mshr> mshr_;
  uint64_t mshr_live_ = 0;
  uint64_t lru_clock_ = 0;
  uint64_t fill_seq_ = 0;
  LevelStats stats_;
};

struct HierarchyConfig {
  CacheLevelConfig l1i{"l1i", 32 * 1024, 8, 2, 16};
  CacheLevelConfig l1d{"l1d", 64 * 1024, 16, 1, 16};
  CacheLevelConfig l2{"l2", 1024 * 1024, 16, 10, 32};
  CacheLevelConfig llc{"llc", 2 * 1024 * 1024, 16, 20, 64};
  uint64_t memory_latency = 200;
};

// L1I and L1D in front of a private L2 and the LLC; non-inclusive, fills
// propagate toward the core, evictions do not back-invalidate.
class CacheHierarchy
{
public:
  explicit CacheHierarchy(const HierarchyConfig& cfg);

  AccessResult ifetch(uint64_t addr, Attribution attr, uint64_t cycle);
  AccessResult data(uint64_t addr, AccessKind kind, Attribution attr, uint64_t cycle);

  // FDIP: prefetch fetch blocks into L1I. Returns how many lookups issued
  // (MSHR-full prefetches are dropped, not retried).
  size_t ftq_prefetch(const std::vector<uint64_t>& blocks, Attribution attr, uint64_t cycle);

  static constexpr std::array<const char*, 4> kLevelNames{"l1i", "l1d", "l2", "llc"};
  LevelStats snapshot(const std::string& level, uint64_t cycle);
  void reset_stats();

  CacheLevel& level(const std::string& name);

private:
  CacheLevel llc_, l2_, l1i_, l1d_;
};

} // namespace wpsim

#endif
