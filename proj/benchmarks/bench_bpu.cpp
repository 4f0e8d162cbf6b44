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

#include "wpsim/bpu.hpp"
#include "wpsim/rng.hpp"

namespace {

void BM_TagePredictUpdate(benchmark::State& state)
{
  wpsim::BpuConfig cfg;
  cfg.tage_tagged_tables = static_cast<uint64_t>(state.range(0));
  wpsim::BranchPredictor bpu(cfg);
  wpsim::SplitMix64 rng(7);

  std::vector<uint64_t> pcs;
  for (int i = 0; i < 512; i++)
    pcs.push_back(0x4000 + 4 * rng.next_below(1 << 14));

  size_t i = 0;
  for (auto _ : state) {
    uint64_t pc = pcs[i++ & 511];
    bool taken = rng.bernoulli(0.7);
    auto p = bpu.predict(pc, wpsim::OpClass::cond_branch, taken, 0x8000);
    bpu.update(pc, wpsim::OpClass::cond_branch, p, taken, taken ? 0x8000 : pc + 4);
    benchmark::DoNotOptimize(p);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TagePredictUpdate)->Arg(0)->Arg(4)->Arg(8);

void BM_HistoryCheckpointRestore(benchmark::State& state)
{
  wpsim::BpuConfig cfg;
  cfg.speculative_history = true;
  wpsim::BranchPredictor bpu(cfg);

  for (auto _ : state) {
    auto tok = bpu.history_checkpoint();
    bpu.on_predicted(0x4000, wpsim::OpClass::cond_branch, true, 0);
    bpu.history_restore(tok);
    benchmark::DoNotOptimize(tok);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_HistoryCheckpointRestore);

} // namespace
