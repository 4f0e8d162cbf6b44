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

#ifndef WPSIM_TRACE_HPP
#define WPSIM_TRACE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpsim {

// Instruction trace with wrong-path annotations.
//
// File layout (all fields little-endian):
//   32-byte header:  magic "WPT1" | u32 version (=1) | u64 record_count |
//                    u32 flags (bit 0: contains_wp_segments) | 12 zero bytes
//   then record_count fixed 64-byte records.
//
// Record layout, in field order:
//   u64 pc | u64 target | u8 op_class | u8 flags | u8 src_regs[4] |
//   u8 dst_regs[2] | u64 mem_addr | u8 mem_size_log2 | 31 zero pad bytes
//
// `target` is the address control actually went to next: the sequential
// successor for non-branches and not-taken branches, the resolved target for
// taken branches. A wrong-path run directly follows its trigger record and
// ends at the first record with the wrong_path flag clear, which is the
// trigger's correct-path successor.

enum class OpClass : uint8_t {
  alu = 0,
  load = 1,
  store = 2,
  cond_branch = 3,
  uncond_direct = 4,
  uncond_indirect = 5,
  call_direct = 6,
  call_indirect = 7,
  ret = 8,
  long_alu = 9,
};

constexpr uint8_t kOpClassCount = 10;

constexpr bool is_branch(OpClass c)
{
  return c >= OpClass::cond_branch && c <= OpClass::ret;
}
constexpr bool is_memory(OpClass c) { return c == OpClass::load || c == OpClass::store; }
constexpr bool is_call(OpClass c) { return c == OpClass::call_direct || c == OpClass::call_indirect; }
constexpr bool is_uncond_direct(OpClass c) { return c == OpClass::uncond_direct || c == OpClass::call_direct; }
constexpr bool is_indirect(OpClass c)
{
  return c == OpClass::uncond_indirect || c == OpClass::call_indirect;
}

enum class TriggerKind : uint8_t { branch_mispredict = 0, ls_disambiguation = 1 };

constexpr uint8_t kRegUnused = 255;
constexpr size_t kRecordBytes = 64;
constexpr size_t kHeaderBytes = 32;
constexpr uint32_t kTraceVersion = 1;
constexpr uint32_t kHeaderFlagHasWp = 1u << 0;
extern const std::array<char, 4> kTraceMagic; // "WPT1"

struct TraceRecord {
  uint64_t pc = 0;
  uint64_t target = 0;
  OpClass op_class = OpClass::alu;
  uint8_t flags = 0;
  std::array<uint8_t, 4> src_regs{kRegUnused, kRegUnused, kRegUnused, kRegUnused};
  std::array<uint8_t, 2> dst_regs{kRegUnused, kRegUnused};
  uint64_t mem_addr = 0;
  uint8_t mem_size_log2 = 0;

  static constexpr uint8_t kFlagTaken = 1u << 0;
  static constexpr uint8_t kFlagWrongPath = 1u << 1;
  static constexpr uint8_t kFlagTrigger = 1u << 2;
  static constexpr uint8_t kFlagTriggerKind = 1u << 3;
  static constexpr uint8_t kFlagReservedMask = 0xf0;

  bool taken() const { return flags & kFlagTaken; }
  bool wrong_path() const { return flags & kFlagWrongPath; }
  bool trigger() const { return flags & kFlagTrigger; }
  TriggerKind trigger_kind() const
  {
    return (flags & kFlagTriggerKind) ? TriggerKind::ls_disambiguation : TriggerKind::branch_mispredict;
  }
  void set_taken(bool v) { flags = v ? (flags | kFlagTaken) : (flags & ~kFlagTaken); }
  void set_wrong_path(bool v) { flags = v ? (flags | kFlagWrongPath) : (flags & ~kFlagWrongPath); }
  void set_trigger(TriggerKind k)
  {
    flags |= kFlagTrigger;
    if (k == TriggerKind::ls_disambiguation)
      flags |= kFlagTriggerKind;
  }

  bool operator==(const TraceRecord&) const = default;
};

struct TraceHeader {
  uint64_t record_count = 0;
  uint32_t flags = 0;

  bool contains_wp_segments() const { return flags & kHeaderFlagHasWp; }
  bool operator==(const TraceHeader&) const = default;
};

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raw 64-byte encode/decode of a single record; no invariant checks.
void encode_record(const TraceRecord& rec, unsigned char out[kRecordBytes]);
TraceRecord decode_record(const unsigned char in[kRecordBytes]);
void encode_header(const TraceHeader& hdr, unsigned char out[kHeaderBytes]);

// Record-local invariant check; returns rule id ("" when clean).
std::string check_record(const TraceRecord& rec, std::string* message = nullptr);

// Streaming encoder. Patches record_count into the header on finish(), so the
// sink must be seekable.
class TraceWriter
{
public:
  explicit TraceWriter(std::ostream& sink);
  ~TraceWriter();

  void add(const TraceRecord& rec); // throws TraceError on invariant violation
  uint64_t finish();                // returns records written

  uint64_t records_written() const { return count_; }

private:
  std::ostream& sink_;
  uint64_t count_ = 0;
  bool any_wp_ = false;
  bool finished_ = false;
};

uint64_t write_trace(const std::vector<TraceRecord>& records, std::ostream& sink);
uint64_t write_trace_file(const std::vector<TraceRecord>& records, const std::string& path);

// Streaming decoder. Strict about layout: magic, version, reserved bits.
class TraceReader
{
public:
  explicit TraceReader(std::istream& source); // reads and checks the header

  const TraceHeader& header() const { return header_; }
  std::optional<TraceRecord> next(); // throws TraceError on truncation/reserved bits
  uint64_t records_read() const { return count_; }
  uint64_t content_hash() const { return hash_; } // FNV-1a over all bytes read

private:
  std::istream& source_;
  TraceHeader header_;
  uint64_t count_ = 0;
  uint64_t hash_;
};

// A fully loaded trace plus its identity hash.
struct TraceImage {
  TraceHeader header;
  std::vector<TraceRecord> records;
  uint64_t content_hash = 0;
};

TraceImage read_trace(std::istream& source);
TraceImage read_trace_file(const std::string& path);

struct Violation {
  uint64_t ordinal; // record index, or UINT64_MAX for file-level problems
  std::string rule;
  std::string message;
};

struct ValidationReport {
  uint64_t cp_records = 0;
  uint64_t wp_records = 0;
  uint64_t segments_branch = 0;
  uint64_t segments_ls = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  uint64_t segments() const { return segments_branch + segments_ls; }
  std::string to_json_lines() const; // one JSON object per violation
  std::string summary_json() const;
};

// Validates the whole file: layout, record invariants, segment structure.
// Never throws on bad data; every problem becomes a Violation.
ValidationReport validate_trace(std::istream& source);
ValidationReport validate_trace_file(const std::string& path);
ValidationReport validate_records(const TraceHeader& header, const std::vector<TraceRecord>& records);

struct WpSegment {
  uint64_t trigger_index = 0; // ordinal of the trigger in the CP stream
  TriggerKind kind = TriggerKind::branch_mispredict;
  std::vector<TraceRecord> records;
};

struct SegmentView {
  std::vector<TraceRecord> cp_stream;
  std::map<uint64_t, WpSegment> segments; // keyed by trigger_index
};

// Splits a validated record stream into its CP stream and WP segments.
// Reinserting each segment after its trigger reproduces the input exactly.
SegmentView segment_view(const std::vector<TraceRecord>& records);

} // namespace wpsim

#endif
