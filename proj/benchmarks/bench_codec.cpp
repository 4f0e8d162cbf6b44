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

#include <sstream>

#include "wpsim/trace.hpp"
#include "wpsim/tracegen.hpp"

namespace {

std::vector<wpsim::TraceRecord> bench_records()
{
  wpsim::WorkloadSpec spec;
  spec.seed = 1;
  spec.instr_count = 50000;
  spec.n_blocks = 64;
  return wpsim::generate(spec).records;
}

void BM_TraceEncode(benchmark::State& state)
{
  auto recs = bench_records();
  for (auto _ : state) {
    std::ostringstream out(std::ios::binary);
    wpsim::write_trace(recs, out);
    benchmark::DoNotOptimize(out);
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * int64_t(recs.size()) * 64);
}
BENCHMARK(BM_TraceEncode);

void BM_TraceDecode(benchmark::State& state)
{
  auto recs = bench_records();
  std::ostringstream out(std::ios::binary);
  wpsim::write_trace(recs, out);
  std::string bytes = out.str();
  for (auto _ : state) {
    std::istringstream in(bytes);
    auto img = wpsim::read_trace(in);
    benchmark::DoNotOptimize(img);
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * int64_t(bytes.size()));
}
BENCHMARK(BM_TraceDecode);

void BM_Validate(benchmark::State& state)
{
  auto recs = bench_records();
  std::ostringstream out(std::ios::binary);
  wpsim::write_trace(recs, out);
  std::string bytes = out.str();
  for (auto _ : state) {
    std::istringstream in(bytes);
    auto rep = wpsim::validate_trace(in);
    benchmark::DoNotOptimize(rep);
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * int64_t(bytes.size()));
}
BENCHMARK(BM_Validate);

void BM_Generate(benchmark::State& state)
{
  wpsim::WorkloadSpec spec;
  spec.seed = 1;
  spec.instr_count = static_cast<uint64_t>(state.range(0));
  spec.n_blocks = 64;
  for (auto _ : state) {
    auto gen = wpsim::generate(spec);
    benchmark::DoNotOptimize(gen);
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Generate)->Arg(10000)->Arg(100000);

} // namespace
