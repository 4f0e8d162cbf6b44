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

#include "wpsim/core.hpp"
#include "wpsim/tracegen.hpp"

namespace {

wpsim::TraceImage bench_trace(wpsim::EmbeddedPredictor pred)
{
  wpsim::WorkloadSpec spec;
  spec.seed = 11;
  spec.instr_count = 20000;
  spec.n_blocks = 64;
  spec.predictor = pred;
  auto gen = wpsim::generate(spec);
  return wpsim::make_image(gen.header, std::move(gen.records));
}

void BM_RunOracle(benchmark::State& state)
{
  auto img = bench_trace(wpsim::EmbeddedPredictor::oracle);
  wpsim::SimConfig cfg;
  cfg.mode = state.range(0) ? wpsim::SimMode::wp : wpsim::SimMode::cp;
  cfg.squash_scan = false;
  for (auto _ : state) {
    auto stats = wpsim::run_trace(img, cfg);
    benchmark::DoNotOptimize(stats);
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_RunOracle)->Arg(0)->Arg(1);

void BM_RunWrongPath(benchmark::State& state)
{
  auto img = bench_trace(wpsim::EmbeddedPredictor::bimodal);
  wpsim::SimConfig cfg;
  cfg.mode = state.range(0) ? wpsim::SimMode::wp : wpsim::SimMode::cp;
  cfg.squash_scan = false;
  for (auto _ : state) {
    auto stats = wpsim::run_trace(img, cfg);
    benchmark::DoNotOptimize(stats);
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_RunWrongPath)->Arg(0)->Arg(1);

} // namespace
