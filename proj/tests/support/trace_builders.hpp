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

#ifndef WPSIM_TESTS_TRACE_BUILDERS_HPP
#define WPSIM_TESTS_TRACE_BUILDERS_HPP

#include <cstdint>
#include <vector>

#include "wpsim/rng.hpp"
#include "wpsim/trace.hpp"

namespace wpsim::test {

inline TraceRecord alu(uint64_t pc, uint8_t dst = 1, uint8_t src0 = 2, uint8_t src1 = 3)
{
  TraceRecord r;
  r.pc = pc;
  r.target = pc + 4;
  r.op_class = OpClass::alu;
  r.dst_regs = {dst, kRegUnused};
  r.src_regs = {src0, src1, kRegUnused, kRegUnused};
  return r;
}

inline TraceRecord load(uint64_t pc, uint64_t addr, uint8_t dst = 4, uint8_t base = 5)
{
  TraceRecord r;
  r.pc = pc;
  r.target = pc + 4;
  r.op_class = OpClass::load;
  r.dst_regs = {dst, kRegUnused};
  r.src_regs = {base, kRegUnused, kRegUnused, kRegUnused};
  r.mem_addr = addr;
  r.mem_size_log2 = 3;
  return r;
}

inline TraceRecord store(uint64_t pc, uint64_t addr, uint8_t val = 6, uint8_t base = 7)
{
  TraceRecord r;
  r.pc = pc;
  r.target = pc + 4;
  r.op_class = OpClass::store;
  r.src_regs = {val, base, kRegUnused, kRegUnused};
  r.mem_addr = addr;
  r.mem_size_log2 = 3;
  return r;
}

inline TraceRecord cond_branch(uint64_t pc, bool taken, uint64_t taken_target, uint8_t src = 8)
{
  TraceRecord r;
  r.pc = pc;
  r.target = taken ? taken_target : pc + 4;
  r.op_class = OpClass::cond_branch;
  r.src_regs = {src, kRegUnused, kRegUnused, kRegUnused};
  r.set_taken(taken);
  return r;
}

inline TraceRecord uncond_jump(uint64_t pc, uint64_t target)
{
  TraceRecord r;
  r.pc = pc;
  r.target = target;
  r.op_class = OpClass::uncond_direct;
  r.set_taken(true);
  return r;
}

inline std::vector<TraceRecord> straight_line(uint64_t base_pc, size_t n)
{
  std::vector<TraceRecord> v;
  v.reserve(n);
  for (size_t i = 0; i < n; i++)
    v.push_back(alu(base_pc + 4 * i, static_cast<uint8_t>(1 + (i % 8)), static_cast<uint8_t>(9 + (i % 4))));
  return v;
}

// Uniform random valid record, for codec round-trip properties.
inline TraceRecord random_record(SplitMix64& rng)
{
  TraceRecord r;
  r.pc = rng.next() & 0x7fffffffffffull;
  r.op_class = static_cast<OpClass>(rng.next_below(kOpClassCount));
  if (is_uncond_direct(r.op_class) || (is_branch(r.op_class) && rng.bernoulli(0.5)))
    r.set_taken(true);
  r.target = is_branch(r.op_class) && r.taken() ? (rng.next() & 0x7fffffffffffull) : r.pc + 4;
  if (is_memory(r.op_class)) {
    r.mem_addr = 1 + (rng.next() & 0xffffffffffull);
    r.mem_size_log2 = static_cast<uint8_t>(rng.next_below(4));
  }
  for (auto& s : r.src_regs)
    s = rng.bernoulli(0.5) ? static_cast<uint8_t>(rng.next_below(255)) : kRegUnused;
  for (auto& d : r.dst_regs)
    d = rng.bernoulli(0.5) ? static_cast<uint8_t>(rng.next_below(255)) : kRegUnused;
  return r;
}

} // namespace wpsim::test

#endif
