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

#include <benchmark/benchmark.h>

#include "wpsim/cache.hpp"
#include "wpsim/rng.hpp"

namespace {

void BM_HierarchyAccess(benchmark::State& state)
{
  wpsim::CacheHierarchy h{wpsim::HierarchyConfig{}};
  wpsim::SplitMix64 rng(3);
  uint64_t working_set = 1ull << static_cast<unsigned>(state.range(0));
  uint64_t cycle = 0;

  for (auto _ : state) {
    uint64_t addr = 0x10000000 + (rng.next() & (working_set - 1));
    auto r = h.data(addr, wpsim::AccessKind::load, wpsim::Attribution::cp, cycle);
    cycle += 2;
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_HierarchyAccess)->Arg(14)->Arg(20)->Arg(24);

void BM_FtqPrefetch(benchmark::State& state)
{
  wpsim::CacheHierarchy h{wpsim::HierarchyConfig{}};
  wpsim::SplitMix64 rng(5);
  uint64_t cycle = 0;
  for (auto _ : state) {
    std::vector<uint64_t> blocks{0x400000 + 64 * rng.next_below(4096)};
    auto n = h.ftq_prefetch(blocks, wpsim::Attribution::wp, cycle++);
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FtqPrefetch);

} // namespace
