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

#include <doctest.h>

#include <sstream>

#include "support/trace_builders.hpp"
#include "wpsim/trace.hpp"
#include "wpsim/tracegen.hpp"

using namespace wpsim;
using namespace wpsim::test;

namespace {

std::string encode_to_string(const std::vector<TraceRecord>& recs)
{
  std::ostringstream out(std::ios::binary);
  write_trace(recs, out);
  return out.str();
}

bool has_rule(const ValidationReport& rep, const std::string& rule)
{
  for (const auto& v : rep.violations)
    if (v.rule == rule)
      return true;
  return false;
}

} // namespace

TEST_CASE("empty trace is exactly a 32-byte header")
{
  std::string bytes = encode_to_string({});
  REQUIRE(bytes.size() == 32);
  CHECK(bytes.substr(0, 4) == "WPT1");
  CHECK(bytes[4] == 1); // version, little-endian
  for (size_t i = 5; i < 32; i++)
    CHECK(bytes[i] == 0); // count 0, flags 0, reserved 0
}

TEST_CASE("three records make a 224-byte file")
{
  auto recs = straight_line(0x1000, 3);
  std::string bytes = encode_to_string(recs);
  CHECK(bytes.size() == 32 + 3 * 64);
}

TEST_CASE("record field layout is frozen")
{
  TraceRecord r;
  r.pc = 0x0102030405060708ull;
  r.target = 0x1112131415161718ull;
  r.op_class = OpClass::load;
  r.set_taken(false);
  r.src_regs = {1, 2, 3, 4};
  r.dst_regs = {5, 6};
  r.mem_addr = 0x2122232425262728ull;
  r.mem_size_log2 = 3;

  unsigned char buf[kRecordBytes];
  encode_record(r, buf);
  // little-endian pc at offset 0
  CHECK(buf[0] == 0x08);
  CHECK(buf[7] == 0x01);
  // target at 8
  CHECK(buf[8] == 0x18);
  CHECK(buf[15] == 0x11);
  CHECK(buf[16] == 1); // op_class load
  CHECK(buf[17] == 0); // flags
  CHECK(buf[18] == 1);
  CHECK(buf[21] == 4);
  CHECK(buf[22] == 5);
  CHECK(buf[23] == 6);
  CHECK(buf[24] == 0x28); // mem_addr
  CHECK(buf[31] == 0x21);
  CHECK(buf[32] == 3); // mem_size_log2
  for (int i = 33; i < 64; i++)
    CHECK(buf[i] == 0);

  CHECK(decode_record(buf) == r);
}

TEST_CASE("writer rejects a load with mem_addr 0, naming the ordinal")
{
  TraceRecord bad = load(0x1000, 0x2000);
  bad.mem_addr = 0;
  std::ostringstream out(std::ios::binary);
  TraceWriter w(out);
  try {
    w.add(bad);
    FAIL("expected TraceError");
  } catch (const TraceError& e) {
    CHECK(std::string(e.what()).find("record 0") != std::string::npos);
    CHECK(std::string(e.what()).find("memory-op-no-addr") != std::string::npos);
  }
}

TEST_CASE("round trip: random valid records decode byte-identically")
{
  SplitMix64 rng(0x1234);
  std::vector<TraceRecord> recs;
  for (int i = 0; i < 1000; i++)
    recs.push_back(random_record(rng));

  std::string bytes = encode_to_string(recs);
  std::istringstream in(bytes);
  TraceImage img = read_trace(in);
  REQUIRE(img.records.size() == recs.size());
  for (size_t i = 0; i < recs.size(); i++)
    CHECK(img.records[i] == recs[i]);

  // and re-encoding reproduces the same bytes
  CHECK(encode_to_string(img.records) == bytes);
}

TEST_CASE("reader rejects bad magic, bad version, truncation, reserved bits")
{
  auto recs = straight_line(0x1000, 2);
  std::string bytes = encode_to_string(recs);

  SUBCASE("bad magic")
  {
    std::string b = bytes;
    b[0] = 'X';
    std::istringstream in(b);
    CHECK_THROWS_WITH_AS(read_trace(in), doctest::Contains("bad magic"), TraceError);
  }
  SUBCASE("bad version")
  {
    std::string b = bytes;
    b[4] = 9;
    std::istringstream in(b);
    CHECK_THROWS_WITH_AS(read_trace(in), doctest::Contains("version"), TraceError);
  }
  SUBCASE("truncated mid-record names the ordinal")
  {
    std::string b = bytes.substr(0, 32 + 64 + 10);
    std::istringstream in(b);
    CHECK_THROWS_WITH_AS(read_trace(in), doctest::Contains("record 1"), TraceError);
  }
  SUBCASE("reserved record flag bits")
  {
    std::string b = bytes;
    b[32 + 17] = static_cast<char>(0x10);
    std::istringstream in(b);
    CHECK_THROWS_WITH_AS(read_trace(in), doctest::Contains("reserved"), TraceError);
  }
}

TEST_CASE("validator: generator output has zero violations")
{
  WorkloadSpec spec;
  spec.seed = 7;
  spec.instr_count = 5000;
  spec.n_blocks = 32;
  spec.ls_trigger_prob = 0.001;
  auto gen = generate(spec);

  std::string bytes = encode_to_string(gen.records);
  std::istringstream in(bytes);
  auto rep = validate_trace(in);
  CHECK(rep.ok());
  CHECK(rep.cp_records + rep.wp_records == gen.records.size());
  CHECK(rep.segments() > 0);
}

TEST_CASE("validator: empty segment")
{
  // trigger followed immediately by a correct-path record
  std::vector<TraceRecord> recs = straight_line(0x1000, 3);
  recs[1] = cond_branch(0x1004, true, 0x1008);
  recs[1].set_trigger(TriggerKind::branch_mispredict);
  auto rep = validate_records(TraceHeader{recs.size(), 0}, recs);
  CHECK(!rep.ok());
  CHECK(has_rule(rep, "empty-wp-segment"));
}

TEST_CASE("validator: nested mis-speculation")
{
  std::vector<TraceRecord> recs;
  recs.push_back(alu(0x1000));
  recs.push_back(cond_branch(0x1004, true, 0x2000));
  recs[1].set_trigger(TriggerKind::branch_mispredict);
  TraceRecord w = alu(0x1008);
  w.set_wrong_path(true);
  w.flags |= TraceRecord::kFlagTrigger; // trigger inside a segment
  recs.push_back(w);
  recs.push_back(alu(0x2000));
  auto rep = validate_records(TraceHeader{recs.size(), kHeaderFlagHasWp}, recs);
  CHECK(has_rule(rep, "nested-mis-speculation"));
}

TEST_CASE("validator: memory-op flag mismatch and more")
{
  SUBCASE("load without address")
  {
    std::vector<TraceRecord> recs{load(0x1000, 0x2000)};
    recs[0].mem_addr = 0;
    auto rep = validate_records(TraceHeader{1, 0}, recs);
    CHECK(has_rule(rep, "memory-op-no-addr"));
  }
  SUBCASE("alu with address")
  {
    std::vector<TraceRecord> recs{alu(0x1000)};
    recs[0].mem_addr = 0x2000;
    auto rep = validate_records(TraceHeader{1, 0}, recs);
    CHECK(has_rule(rep, "non-memory-op-addr"));
  }
  SUBCASE("orphan wrong-path record")
  {
    std::vector<TraceRecord> recs{alu(0x1000), alu(0x1004)};
    recs[1].set_wrong_path(true);
    auto rep = validate_records(TraceHeader{2, kHeaderFlagHasWp}, recs);
    CHECK(has_rule(rep, "orphan-wp-record"));
  }
  SUBCASE("unterminated segment at end of file")
  {
    std::vector<TraceRecord> recs{alu(0x1000), alu(0x1004)};
    recs[0].set_trigger(TriggerKind::ls_disambiguation);
    recs[0].op_class = OpClass::load;
    recs[0].mem_addr = 0x2000;
    recs[1].set_wrong_path(true);
    auto rep = validate_records(TraceHeader{2, kHeaderFlagHasWp}, recs);
    CHECK(has_rule(rep, "unterminated-wp-segment"));
  }
  SUBCASE("not-taken unconditional direct")
  {
    std::vector<TraceRecord> recs{uncond_jump(0x1000, 0x2000)};
    recs[0].set_taken(false);
    recs[0].target = 0x2000;
    auto rep = validate_records(TraceHeader{1, 0}, recs);
    CHECK(has_rule(rep, "uncond-direct-not-taken"));
  }
  SUBCASE("header record count mismatch")
  {
    std::vector<TraceRecord> recs{alu(0x1000)};
    auto rep = validate_records(TraceHeader{5, 0}, recs);
    CHECK(has_rule(rep, "header-record-count"));
  }
}

TEST_CASE("violations serialize as JSON lines")
{
  std::vector<TraceRecord> recs{alu(0x1000)};
  recs[0].mem_addr = 0x2000;
  auto rep = validate_records(TraceHeader{1, 0}, recs);
  std::string lines = rep.to_json_lines();
  CHECK(lines.find("\"ordinal\":0") != std::string::npos);
  CHECK(lines.find("\"rule\":\"non-memory-op-addr\"") != std::string::npos);
  CHECK(lines.back() == '\n');
}

TEST_CASE("segment_view splits A,B(trigger),w1,w2,C as specified")
{
  std::vector<TraceRecord> recs;
  recs.push_back(alu(0x1000));                     // A
  recs.push_back(cond_branch(0x1004, true, 0x3000)); // B, trigger
  recs[1].set_trigger(TriggerKind::branch_mispredict);
  TraceRecord w1 = alu(0x1008);
  w1.set_wrong_path(true);
  TraceRecord w2 = alu(0x100c);
  w2.set_wrong_path(true);
  recs.push_back(w1);
  recs.push_back(w2);
  recs.push_back(alu(0x3000)); // C

  auto view = segment_view(recs);
  REQUIRE(view.cp_stream.size() == 3);
  CHECK(view.cp_stream[0].pc == 0x1000);
  CHECK(view.cp_stream[1].pc == 0x1004);
  CHECK(view.cp_stream[2].pc == 0x3000);
  REQUIRE(view.segments.size() == 1);
  REQUIRE(view.segments.count(1) == 1);
  const auto& seg = view.segments.at(1);
  CHECK(seg.kind == TriggerKind::branch_mispredict);
  REQUIRE(seg.records.size() == 2);
  CHECK(seg.records[0].pc == 0x1008);
  CHECK(seg.records[1].pc == 0x100c);
}

TEST_CASE("segment_view reinsertion reproduces the input exactly")
{
  WorkloadSpec spec;
  spec.seed = 11;
  spec.instr_count = 8000;
  spec.n_blocks = 40;
  spec.ls_trigger_prob = 0.002;
  auto gen = generate(spec);

  auto view = segment_view(gen.records);
  std::vector<TraceRecord> rebuilt;
  for (uint64_t i = 0; i < view.cp_stream.size(); i++) {
    rebuilt.push_back(view.cp_stream[i]);
    if (auto it = view.segments.find(i); it != view.segments.end())
      for (const auto& r : it->second.records)
        rebuilt.push_back(r);
  }
  REQUIRE(rebuilt.size() == gen.records.size());
  CHECK(encode_to_string(rebuilt) == encode_to_string(gen.records));

  // every WP record in exactly one segment
  uint64_t wp_count = 0;
  for (const auto& r : gen.records)
    if (r.wrong_path())
      wp_count++;
  uint64_t seg_records = 0;
  for (const auto& [idx, seg] : view.segments)
    seg_records += seg.records.size();
  CHECK(wp_count == seg_records);
}
