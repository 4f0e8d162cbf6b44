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

#include "wpsim/tracegen.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "wpsim/rng.hpp"

namespace wpsim {

void WorkloadSpec::validate() const
{
  auto frac = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (instr_count < 1)
    throw ConfigError("workload: instr_count must be >= 1");
  if (n_blocks < 2)
    throw ConfigError("workload: n_blocks must be >= 2");
  if (block_len_min < 1 || block_len_min > block_len_max)
    throw ConfigError("workload: need 1 <= block_len_min <= block_len_max");
  if (cond_bias_a <= 0.0 || cond_bias_b <= 0.0)
    throw ConfigError("workload: cond_bias parameters must be positive");
  if (!frac(indirect_fraction) || !frac(call_fraction) || !frac(uncond_fraction) || !frac(load_fraction) || !frac(store_fraction) ||
      !frac(longlat_fraction) || !frac(vec_fraction) || !frac(pointer_chase_fraction) || !frac(mix) || !frac(ls_trigger_prob))
    throw ConfigError("workload: fractions must be in [0,1]");
  if (load_fraction + store_fraction > 1.0)
    throw ConfigError("workload: load_fraction + store_fraction must be <= 1");
  if (indirect_targets < 1)
    throw ConfigError("workload: indirect_targets must be >= 1");
  if (wp_depth_limit < 1)
    throw ConfigError("workload: wp_depth_limit must be >= 1");
  if (call_depth_max >= 1 && n_blocks < 2 * (call_depth_max + 1))
    throw ConfigError("workload: n_blocks too small for call_depth_max (need >= " + std::to_string(2 * (call_depth_max + 1)) + ")");
  if (data_working_set_bytes < 64)
    throw ConfigError("workload: data_working_set_bytes must be >= 64");
}

WorkloadSpec WorkloadSpec::from_config(KvConfig cfg)
{
  WorkloadSpec s;
  s.seed = cfg.get_u64("seed", s.seed);
  s.instr_count = cfg.get_u64("instr_count", s.instr_count);
  s.n_blocks = cfg.get_u64("n_blocks", s.n_blocks);
  s.block_len_min = cfg.get_u64("block_len_min", s.block_len_min);
  s.block_len_max = cfg.get_u64("block_len_max", s.block_len_max);
  s.cond_bias_a = cfg.get_double("cond_bias_a", s.cond_bias_a);
  s.cond_bias_b = cfg.get_double("cond_bias_b", s.cond_bias_b);
  s.indirect_fraction = cfg.get_double("indirect_fraction", s.indirect_fraction);
  s.indirect_targets = cfg.get_u64("indirect_targets", s.indirect_targets);
  s.call_fraction = cfg.get_double("call_fraction", s.call_fraction);
  s.uncond_fraction = cfg.get_double("uncond_fraction", s.uncond_fraction);
  s.call_depth_max = cfg.get_u64("call_depth_max", s.call_depth_max);
  s.code_footprint_bytes = cfg.get_u64("code_footprint_bytes", s.code_footprint_bytes);
  s.load_fraction = cfg.get_double("load_fraction", s.load_fraction);
  s.store_fraction = cfg.get_double("store_fraction", s.store_fraction);
  s.longlat_fraction = cfg.get_double("longlat_fraction", s.longlat_fraction);
  s.vec_fraction = cfg.get_double("vec_fraction", s.vec_fraction);
  s.pointer_chase_fraction = cfg.get_double("pointer_chase_fraction", s.pointer_chase_fraction);
  s.data_working_set_bytes = cfg.get_u64("data_working_set_bytes", s.data_working_set_bytes);
  std::string pred = cfg.get_string("predictor", "bimodal");
  if (pred == "oracle")
    s.predictor = EmbeddedPredictor::oracle;
  else if (pred == "bimodal")
    s.predictor = EmbeddedPredictor::bimodal;
  else if (pred == "gshare")
    s.predictor = EmbeddedPredictor::gshare;
  else
    throw ConfigError("workload: predictor must be oracle|bimodal|gshare, got '" + pred + "'");
  s.predictor_table_bits = cfg.get_u64("predictor_table_bits", s.predictor_table_bits);
  s.predictor_hist_bits = cfg.get_u64("predictor_hist_bits", s.predictor_hist_bits);
  s.mix = cfg.get_double("mix", s.mix);
  s.ls_trigger_prob = cfg.get_double("ls_trigger_prob", s.ls_trigger_prob);
  s.wp_depth_limit = cfg.get_u64("wp_depth_limit", s.wp_depth_limit);
  cfg.reject_unknown_keys();
  s.validate();
  return s;
}

WorkloadSpec WorkloadSpec::from_file(const std::string& path)
{
  return from_config(KvConfig::parse_file(path));
}

namespace {

constexpr uint64_t kCodeBase = 0x100000;
constexpr uint64_t kDataBase = 0x10000000;
constexpr uint64_t kInstrBytes = 4;

enum class TermKind { cond, uncond, indirect, call, call_indirect, ret };

enum class SlotKind { alu, vec_alu, long_alu, load, chase_load, store };

struct BodySlot {
  SlotKind kind;
  std::array<uint8_t, 2> dst{kRegUnused, kRegUnused};
  std::array<uint8_t, 4> src{kRegUnused, kRegUnused, kRegUnused, kRegUnused};
  uint8_t mem_size_log2 = 0;
  bool stream_addr = false; // sequential walker vs uniform random address
};

struct Block {
  uint64_t addr = 0;
  uint32_t func = 0;
  std::vector<BodySlot> body;
  TermKind term = TermKind::cond;
  double bias = 0.5;              // cond: taken probability
  uint32_t target = 0;            // cond taken / uncond / direct call target block
  std::vector<uint32_t> itargets; // indirect target blocks
  std::array<uint8_t, 4> term_src{kRegUnused, kRegUnused, kRegUnused, kRegUnused};
  std::array<uint8_t, 2> term_dst{kRegUnused, kRegUnused};

  uint64_t term_pc() const { return addr + kInstrBytes * body.size(); }
  uint64_t len() const { return body.size() + 1; }
  uint64_t end_addr() const { return addr + kInstrBytes * len(); }
};

struct Cfg {
  std::vector<Block> blocks;
  std::vector<std::pair<uint32_t, uint32_t>> func_range; // [first, last) block of each function
  std::vector<std::vector<uint32_t>> callees_of_depth;   // function entry blocks per depth
  std::map<uint64_t, uint32_t> addr_index;               // block entry addr -> block id

  // Maps an arbitrary address into (block, slot). Addresses in layout gaps
  // resolve to the next block, wrapping at the end.
  std::pair<uint32_t, uint32_t> locate(uint64_t addr) const
  {
    auto it = addr_index.upper_bound(addr);
    if (it != addr_index.begin()) {
      auto prev = std::prev(it);
      const Block& b = blocks[prev->second];
      if (addr < b.end_addr()) {
        uint32_t slot = static_cast<uint32_t>((addr - b.addr) / kInstrBytes);
        return {prev->second, slot};
      }
    }
    if (it == addr_index.end())
      it = addr_index.begin();
    return {it->second, 0};
  }
};

constexpr uint8_t kIntRegLo = 0, kIntRegHi = 29, kLinkReg = 30;
constexpr uint8_t kVecRegLo = 128, kVecRegHi = 143;

uint8_t rand_int_reg(SplitMix64& rng) { return static_cast<uint8_t>(kIntRegLo + rng.next_below(kIntRegHi - kIntRegLo + 1)); }
uint8_t rand_vec_reg(SplitMix64& rng) { return static_cast<uint8_t>(kVecRegLo + rng.next_below(kVecRegHi - kVecRegLo + 1)); }

Cfg build_cfg(const WorkloadSpec& spec)
{
  SplitMix64 rng(derive_seed(spec.seed, 0));
  Cfg cfg;

  // Partition blocks into functions: main plus one pool per call depth.
  uint32_t funcs = static_cast<uint32_t>(std::max<uint64_t>(1, std::min<uint64_t>(spec.n_blocks / 4, 12)));
  if (spec.call_depth_max >= 1)
    funcs = std::max(funcs, static_cast<uint32_t>(spec.call_depth_max + 1));
  funcs = std::min<uint32_t>(funcs, static_cast<uint32_t>(spec.n_blocks / 2));

  std::vector<uint32_t> func_len(funcs, static_cast<uint32_t>(spec.n_blocks / funcs));
  for (uint32_t i = 0; i < spec.n_blocks % funcs; i++)
    func_len[i]++;

  std::vector<uint32_t> func_depth(funcs, 0);
  for (uint32_t f = 1; f < funcs; f++)
    func_depth[f] = spec.call_depth_max ? 1 + (f - 1) % static_cast<uint32_t>(spec.call_depth_max) : 0;

  cfg.blocks.resize(spec.n_blocks);
  cfg.func_range.resize(funcs);
  uint32_t next_block = 0;
  for (uint32_t f = 0; f < funcs; f++) {
    cfg.func_range[f] = {next_block, next_block + func_len[f]};
    for (uint32_t b = next_block; b < next_block + func_len[f]; b++)
      cfg.blocks[b].func = f;
    next_block += func_len[f];
  }

  cfg.callees_of_depth.resize(spec.call_depth_max + 2);
  for (uint32_t f = 1; f < funcs; f++)
    cfg.callees_of_depth[func_depth[f]].push_back(cfg.func_range[f].first);

  // Body slots and terminators.
  for (uint32_t bi = 0; bi < spec.n_blocks; bi++) {
    Block& b = cfg.blocks[bi];
    auto [fbegin, fend] = cfg.func_range[b.func];
    uint64_t len = spec.block_len_min + rng.next_below(spec.block_len_max - spec.block_len_min + 1);

    b.body.resize(len - 1);
    for (auto& slot : b.body) {
      double r = rng.next_double();
      if (r < spec.load_fraction) {
        slot.kind = rng.bernoulli(spec.pointer_chase_fraction) ? SlotKind::chase_load : SlotKind::load;
        slot.dst[0] = rand_int_reg(rng);
        slot.src[0] = rand_int_reg(rng);
        slot.mem_size_log2 = rng.bernoulli(0.5) ? 3 : 2;
        slot.stream_addr = rng.bernoulli(0.5);
      } else if (r < spec.load_fraction + spec.store_fraction) {
        slot.kind = SlotKind::store;
        slot.src[0] = rand_int_reg(rng);
        slot.src[1] = rand_int_reg(rng);
        slot.mem_size_log2 = rng.bernoulli(0.5) ? 3 : 2;
        slot.stream_addr = rng.bernoulli(0.5);
      } else if (r < spec.load_fraction + spec.store_fraction + spec.longlat_fraction) {
        slot.kind = SlotKind::long_alu;
        slot.dst[0] = rand_int_reg(rng);
        slot.src[0] = rand_int_reg(rng);
        slot.src[1] = rand_int_reg(rng);
      } else if (r < spec.load_fraction + spec.store_fraction + spec.longlat_fraction + spec.vec_fraction) {
        slot.kind = SlotKind::vec_alu;
        slot.dst[0] = rand_vec_reg(rng);
        slot.src[0] = rand_vec_reg(rng);
        slot.src[1] = rand_vec_reg(rng);
      } else {
        slot.kind = SlotKind::alu;
        slot.dst[0] = rand_int_reg(rng);
        slot.src[0] = rand_int_reg(rng);
        slot.src[1] = rand_int_reg(rng);
      }
    }

    bool is_last = (bi + 1 == fend);
    uint32_t depth = func_depth[b.func];
    bool can_call = depth < spec.call_depth_max && !cfg.callees_of_depth[depth + 1].empty();
    auto same_func_block = [&]() { return fbegin + static_cast<uint32_t>(rng.next_below(fend - fbegin)); };

    if (is_last) {
      if (b.func == 0) {
        b.term = TermKind::uncond; // main loops forever
        b.target = fbegin;
      } else {
        b.term = TermKind::ret;
        b.term_src[0] = kLinkReg;
      }
      continue;
    }

    double r = rng.next_double();
    if (r < spec.indirect_fraction) {
      bool icall = can_call && rng.bernoulli(0.3);
      b.term = icall ? TermKind::call_indirect : TermKind::indirect;
      uint64_t k = std::max<uint64_t>(2, spec.indirect_targets);
      for (uint64_t t = 0; t < k; t++) {
        if (icall) {
          const auto& pool = cfg.callees_of_depth[depth + 1];
          b.itargets.push_back(pool[rng.next_below(pool.size())]);
        } else {
          b.itargets.push_back(same_func_block());
        }
      }
      b.term_src[0] = rand_int_reg(rng);
      if (icall)
        b.term_dst[0] = kLinkReg;
    } else if (r < spec.indirect_fraction + spec.call_fraction && can_call) {
      b.term = TermKind::call;
      const auto& pool = cfg.callees_of_depth[depth + 1];
      b.target = pool[rng.next_below(pool.size())];
      b.term_dst[0] = kLinkReg;
    } else if (r < spec.indirect_fraction + spec.call_fraction + spec.uncond_fraction) {
      b.term = TermKind::uncond;
      b.target = same_func_block();
    } else {
      b.term = TermKind::cond;
      b.bias = kumaraswamy(rng, spec.cond_bias_a, spec.cond_bias_b);
      b.target = same_func_block();
      b.term_src[0] = rand_int_reg(rng);
      b.term_src[1] = rand_int_reg(rng);
    }
  }

  // Layout: blocks contiguous within a function; functions spread across the
  // requested code footprint when it exceeds the natural size.
  std::vector<uint64_t> func_bytes(funcs, 0);
  for (const auto& b : cfg.blocks)
    func_bytes[b.func] += kInstrBytes * b.len();

  uint64_t natural = 0;
  for (auto fb : func_bytes)
    natural += (fb + 63) & ~63ull;
  uint64_t stride_extra = 0;
  if (spec.code_footprint_bytes > natural)
    stride_extra = ((spec.code_footprint_bytes - natural) / funcs) & ~63ull;

  uint64_t cursor = kCodeBase;
  for (uint32_t f = 0; f < funcs; f++) {
    uint64_t addr = cursor;
    for (uint32_t b = cfg.func_range[f].first; b < cfg.func_range[f].second; b++) {
      cfg.blocks[b].addr = addr;
      addr += kInstrBytes * cfg.blocks[b].len();
    }
    cursor = ((addr + 63) & ~63ull) + stride_extra;
  }

  for (uint32_t b = 0; b < cfg.blocks.size(); b++)
    cfg.addr_index[cfg.blocks[b].addr] = b;

  return cfg;
}

// Reference predictor embedded in the generator: a direction table
// (bimodal/gshare), per-site last-target memory for indirects, and a
// seen-set standing in for a cold BTB on direct jumps. Returns never
// mispredict; call/return pairing in the walk is exact.
class EmbeddedBpu
{
public:
  explicit EmbeddedBpu(const WorkloadSpec& spec) : spec_(spec), table_(1ull << spec.predictor_table_bits, 1) {}

  // Predicted (taken, target). `taken_target` is the branch's static taken
  // destination, `fall` its fall-through.
  std::pair<bool, uint64_t> predict(uint64_t pc, OpClass cls, bool actual_taken, uint64_t actual_target, uint64_t taken_target, uint64_t fall)
  {
    switch (cls) {
    case OpClass::cond_branch: {
      if (spec_.predictor == EmbeddedPredictor::oracle)
        return {actual_taken, actual_target};
      bool pred = table_[index(pc)] >= 2;
      return {pred, pred ? taken_target : fall};
    }
    case OpClass::uncond_direct:
    case OpClass::call_direct: {
      if (spec_.predictor == EmbeddedPredictor::oracle || seen_.count(pc))
        return {true, taken_target};
      return {false, fall}; // cold BTB: falls through until learned
    }
    case OpClass::uncond_indirect:
    case OpClass::call_indirect: {
      if (spec_.predictor == EmbeddedPredictor::oracle)
        return {true, actual_target};
      auto it = last_target_.find(pc);
      if (it == last_target_.end())
        return {false, fall};
      return {true, it->second};
    }
    case OpClass::ret:
      return {true, actual_target};
    default:
      return {actual_taken, actual_target};
    }
  }

  void update(uint64_t pc, OpClass cls, bool taken, uint64_t target)
  {
    switch (cls) {
    case OpClass::cond_branch: {
      uint8_t& ctr = table_[index(pc)];
      if (taken && ctr < 3)
        ctr++;
      if (!taken && ctr > 0)
        ctr--;
      hist_ = (hist_ << 1) | (taken ? 1 : 0);
      break;
    }
    case OpClass::uncond_direct:
    case OpClass::call_direct:
      seen_.insert(pc);
      break;
    case OpClass::uncond_indirect:
    case OpClass::call_indirect:
      last_target_[pc] = target;
      break;
    default:
      break;
    }
  }

private:
  size_t index(uint64_t pc) const
  {
    uint64_t mask = (1ull << spec_.predictor_table_bits) - 1;
    uint64_t idx = pc >> 2;
    if (spec_.predictor == EmbeddedPredictor::gshare)
      idx ^= hist_ & ((1ull << spec_.predictor_hist_bits) - 1);
    return idx & mask;
  }

  const WorkloadSpec& spec_;
  std::vector<uint8_t> table_;
  uint64_t hist_ = 0;
  std::unordered_set<uint64_t> seen_;
  std::unordered_map<uint64_t, uint64_t> last_target_;
};

// Dynamic walk state. Cloned wholesale when a segment is emitted, so a wrong
// path excursion can never disturb the CP walk.
struct WalkState {
  uint32_t block = 0;
  uint32_t slot = 0;
  std::vector<uint32_t> ret_stack; // block to resume after return
  uint64_t stream_cursor = 0;      // sequential data pointer
  uint8_t last_load_dst = kRegUnused;
};

class Walker
{
public:
  Walker(const WorkloadSpec& spec, const Cfg& cfg) : spec_(spec), cfg_(cfg) {}

  // Emits the instruction at (st.block, st.slot) and advances st. For branch
  // terminators *taken_target receives the static taken destination.
  TraceRecord emit_step(WalkState& st, SplitMix64& rng, uint64_t* taken_target = nullptr)
  {
    const Block& b = cfg_.blocks[st.block];
    TraceRecord rec;

    if (st.slot < b.body.size()) {
      const BodySlot& slot = b.body[st.slot];
      rec.pc = b.addr + kInstrBytes * st.slot;
      rec.target = rec.pc + kInstrBytes;
      rec.dst_regs = slot.dst;
      rec.src_regs = slot.src;
      switch (slot.kind) {
      case SlotKind::alu:
      case SlotKind::vec_alu:
        rec.op_class = OpClass::alu;
        break;
      case SlotKind::long_alu:
        rec.op_class = OpClass::long_alu;
        break;
      case SlotKind::load:
      case SlotKind::chase_load:
        rec.op_class = OpClass::load;
        rec.mem_size_log2 = slot.mem_size_log2;
        rec.mem_addr = data_addr(st, slot, rng);
        if (slot.kind == SlotKind::chase_load && st.last_load_dst != kRegUnused)
          rec.src_regs[1] = st.last_load_dst;
        st.last_load_dst = rec.dst_regs[0];
        break;
      case SlotKind::store:
        rec.op_class = OpClass::store;
        rec.mem_size_log2 = slot.mem_size_log2;
        rec.mem_addr = data_addr(st, slot, rng);
        break;
      }
      st.slot++;
      return rec;
    }

    // terminator
    rec.pc = b.term_pc();
    rec.src_regs = b.term_src;
    rec.dst_regs = b.term_dst;
    uint64_t fall = rec.pc + kInstrBytes;

    switch (b.term) {
    case TermKind::cond: {
      rec.op_class = OpClass::cond_branch;
      bool taken = rng.bernoulli(b.bias);
      rec.set_taken(taken);
      rec.target = taken ? cfg_.blocks[b.target].addr : fall;
      if (taken_target)
        *taken_target = cfg_.blocks[b.target].addr;
      go(st, taken ? b.target : st.block + 1);
      break;
    }
    case TermKind::uncond: {
      rec.op_class = OpClass::uncond_direct;
      rec.set_taken(true);
      rec.target = cfg_.blocks[b.target].addr;
      if (taken_target)
        *taken_target = rec.target;
      go(st, b.target);
      break;
    }
    case TermKind::indirect: {
      rec.op_class = OpClass::uncond_indirect;
      rec.set_taken(true);
      uint32_t t = b.itargets[rng.next_below(b.itargets.size())];
      rec.target = cfg_.blocks[t].addr;
      if (taken_target)
        *taken_target = rec.target;
      go(st, t);
      break;
    }
    case TermKind::call: {
      rec.op_class = OpClass::call_direct;
      rec.set_taken(true);
      rec.target = cfg_.blocks[b.target].addr;
      if (taken_target)
        *taken_target = rec.target;
      st.ret_stack.push_back(st.block + 1);
      go(st, b.target);
      break;
    }
    case TermKind::call_indirect: {
      rec.op_class = OpClass::call_indirect;
      rec.set_taken(true);
      uint32_t t = b.itargets[rng.next_below(b.itargets.size())];
      rec.target = cfg_.blocks[t].addr;
      if (taken_target)
        *taken_target = rec.target;
      st.ret_stack.push_back(st.block + 1);
      go(st, t);
      break;
    }
    case TermKind::ret: {
      rec.op_class = OpClass::ret;
      rec.set_taken(true);
      uint32_t t;
      if (st.ret_stack.empty()) {
        t = 0; // underflowed clone stacks land on main's entry
      } else {
        t = st.ret_stack.back();
        st.ret_stack.pop_back();
      }
      rec.target = cfg_.blocks[t].addr;
      if (taken_target)
        *taken_target = rec.target;
      go(st, t);
      break;
    }
    }
    return rec;
  }

  // True if the next step from st emits a load or a branch terminator, i.e.
  // a record that might become a trigger.
  bool next_may_trigger(const WalkState& st) const
  {
    const Block& b = cfg_.blocks[st.block];
    if (st.slot >= b.body.size())
      return true;
    SlotKind k = b.body[st.slot].kind;
    return k == SlotKind::load || k == SlotKind::chase_load;
  }

private:
  void go(WalkState& st, uint32_t block)
  {
    st.block = block;
    st.slot = 0;
  }

  uint64_t data_addr(WalkState& st, const BodySlot& slot, SplitMix64& rng)
  {
    uint64_t size = 1ull << slot.mem_size_log2;
    uint64_t offs;
    if (slot.stream_addr && slot.kind != SlotKind::chase_load) {
      offs = st.stream_cursor % spec_.data_working_set_bytes;
      st.stream_cursor += size;
    } else {
      offs = rng.next_below(spec_.data_working_set_bytes);
    }
    return kDataBase + (offs & ~(size - 1));
  }

  const WorkloadSpec& spec_;
  const Cfg& cfg_;
};

} // namespace

GeneratedTrace generate(const WorkloadSpec& spec)
{
  spec.validate();

  Cfg cfg = build_cfg(spec);
  Walker walker(spec, cfg);
  EmbeddedBpu bpu(spec);

  SplitMix64 cp_rng(derive_seed(spec.seed, 1));
  SplitMix64 wp_rng(derive_seed(spec.seed, 2));
  SplitMix64 pred_rng(derive_seed(spec.seed, 3));

  GeneratedTrace out;
  out.records.reserve(spec.instr_count + spec.instr_count / 8);

  WalkState cp;
  uint64_t cp_emitted = 0;
  bool any_wp = false;

  // Per-segment depth varies with how long the producer machine would have
  // run before the resteer; wp_depth_limit is the structural cap.
  auto emit_segment = [&](uint64_t start_addr, const WalkState& from) {
    WalkState wp = from;
    auto [blk, slot] = cfg.locate(start_addr);
    wp.block = blk;
    wp.slot = slot;
    uint64_t depth = 1 + wp_rng.next_below(std::min<uint64_t>(spec.wp_depth_limit, 160));
    for (uint64_t n = 0; n < depth; n++) {
      TraceRecord rec = walker.emit_step(wp, wp_rng);
      rec.set_wrong_path(true);
      out.records.push_back(rec);
    }
    any_wp = true;
  };

  WalkState before;
  while (cp_emitted < spec.instr_count || (!out.records.empty() && out.records.back().wrong_path())) {
    bool suppress = cp_emitted >= spec.instr_count; // terminal padding record stays trigger-free
    bool may_trigger = walker.next_may_trigger(cp);
    if (may_trigger)
      before = cp;

    uint64_t taken_target = 0;
    TraceRecord rec = walker.emit_step(cp, cp_rng, &taken_target);
    uint64_t rec_index = out.records.size();
    out.records.push_back(rec);
    cp_emitted++;

    if (rec.op_class == OpClass::load) {
      bool ls_fail = cp_rng.bernoulli(spec.ls_trigger_prob); // drawn per load to keep the CP stream stable
      if (ls_fail && !suppress) {
        out.records[rec_index].set_trigger(TriggerKind::ls_disambiguation);
        WalkState resume = before;
        resume.slot++; // replay starts at the load's successor
        emit_segment(cfg.blocks[resume.block].addr + kInstrBytes * resume.slot, resume);
        continue;
      }
    }

    if (is_branch(rec.op_class)) {
      uint64_t fall = rec.pc + kInstrBytes;
      auto [pred_taken, pred_target] = bpu.predict(rec.pc, rec.op_class, rec.taken(), rec.target, taken_target, fall);
      bpu.update(rec.pc, rec.op_class, rec.taken(), rec.target);
      bool mispredicted = (pred_taken != rec.taken()) || (pred_taken && pred_target != rec.target);
      if (mispredicted && !suppress && pred_rng.bernoulli(spec.mix)) {
        out.records[rec_index].set_trigger(TriggerKind::branch_mispredict);
        emit_segment(pred_taken ? pred_target : fall, before);
      }
    }
  }

  out.header.record_count = out.records.size();
  out.header.flags = any_wp ? kHeaderFlagHasWp : 0;
  return out;
}

GeneratorReport describe(const WorkloadSpec& spec, const std::vector<TraceRecord>& records)
{
  (void)spec;
  GeneratorReport rep;

  std::set<uint64_t> cp_blocks, code_blocks, data_lines;
  uint64_t seg_len = 0;
  bool in_seg = false;

  for (const auto& rec : records) {
    code_blocks.insert(rec.pc >> 6);
    if (rec.mem_addr)
      data_lines.insert(rec.mem_addr >> 6);
    if (rec.wrong_path()) {
      rep.wp_records++;
      seg_len++;
      in_seg = true;
    } else {
      if (in_seg) {
        rep.segment_length_hist[seg_len]++;
        seg_len = 0;
        in_seg = false;
      }
      rep.cp_records++;
      cp_blocks.insert(rec.pc >> 6);
      if (rec.trigger()) {
        if (rec.trigger_kind() == TriggerKind::branch_mispredict)
          rep.mispredict_triggers++;
        else
          rep.ls_triggers++;
      }
    }
  }
  if (in_seg)
    rep.segment_length_hist[seg_len]++;

  uint64_t wp_on_cp_block = 0;
  for (const auto& rec : records)
    if (rec.wrong_path() && cp_blocks.count(rec.pc >> 6))
      wp_on_cp_block++;

  rep.code_blocks_touched = code_blocks.size();
  rep.data_lines_touched = data_lines.size();
  if (rep.cp_records)
    rep.mispredict_density_per_ki = 1000.0 * static_cast<double>(rep.mispredict_triggers + rep.ls_triggers) / static_cast<double>(rep.cp_records);
  if (rep.wp_records)
    rep.wp_reconvergence_fraction = static_cast<double>(wp_on_cp_block) / static_cast<double>(rep.wp_records);
  return rep;
}

std::string GeneratorReport::to_json() const
{
  nlohmann::ordered_json j;
  j["cp_records"] = cp_records;
  j["wp_records"] = wp_records;
  j["mispredict_triggers"] = mispredict_triggers;
  j["ls_triggers"] = ls_triggers;
  j["mispredict_density_per_ki"] = mispredict_density_per_ki;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (auto& [len, count] : segment_length_hist)
    hist[std::to_string(len)] = count;
  j["segment_length_hist"] = hist;
  j["code_blocks_touched"] = code_blocks_touched;
  j["data_lines_touched"] = data_lines_touched;
  j["wp_reconvergence_fraction"] = wp_reconvergence_fraction;
  return j.dump(2);
}

} // namespace wpsim
