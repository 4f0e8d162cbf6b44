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

#include "wpsim/trace.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wpsim/rng.hpp"

namespace wpsim {

const std::array<char, 4> kTraceMagic = {'W', 'P', 'T', '1'};

namespace {

void put_u32(unsigned char* p, uint32_t v)
{
  p[0] = v & 0xff;
  p[1] = (v >> 8) & 0xff;
  p[2] = (v >> 16) & 0xff;
  p[3] = (v >> 24) & 0xff;
}

void put_u64(unsigned char* p, uint64_t v)
{
  for (int i = 0; i < 8; i++)
    p[i] = (v >> (8 * i)) & 0xff;
}

uint32_t get_u32(const unsigned char* p)
{
  return uint32_t{p[0]} | uint32_t{p[1]} << 8 | uint32_t{p[2]} << 16 | uint32_t{p[3]} << 24;
}

uint64_t get_u64(const unsigned char* p)
{
  uint64_t v = 0;
  for (int i = 0; i < 8; i++)
    v |= uint64_t{p[i]} << (8 * i);
  return v;
}

} // namespace

void encode_record(const TraceRecord& rec, unsigned char out[kRecordBytes])
{
  std::memset(out, 0, kRecordBytes);
  put_u64(out + 0, rec.pc);
  put_u64(out + 8, rec.target);
  out[16] = static_cast<uint8_t>(rec.op_class);
  out[17] = rec.flags;
  std::memcpy(out + 18, rec.src_regs.data(), 4);
  std::memcpy(out + 22, rec.dst_regs.data(), 2);
  put_u64(out + 24, rec.mem_addr);
  out[32] = rec.mem_size_log2;
}

TraceRecord decode_record(const unsigned char in[kRecordBytes])
{
  TraceRecord rec;
  rec.pc = get_u64(in + 0);
  rec.target = get_u64(in + 8);
  rec.op_class = static_cast<OpClass>(in[16]);
  rec.flags = in[17];
  std::memcpy(rec.src_regs.data(), in + 18, 4);
  std::memcpy(rec.dst_regs.data(), in + 22, 2);
  rec.mem_addr = get_u64(in + 24);
  rec.mem_size_log2 = in[32];
  return rec;
}

void encode_header(const TraceHeader& hdr, unsigned char out[kHeaderBytes])
{
  std::memset(out, 0, kHeaderBytes);
  std::memcpy(out, kTraceMagic.data(), 4);
  put_u32(out + 4, kTraceVersion);
  put_u64(out + 8, hdr.record_count);
  put_u32(out + 16, hdr.flags);
}

std::string check_record(const TraceRecord& rec, std::string* message)
{
  auto fail = [&](const char* rule, const std::string& msg) {
    if (message)
      *message = msg;
    return std::string(rule);
  };

  if (static_cast<uint8_t>(rec.op_class) >= kOpClassCount)
    return fail("op-class-range", "op_class " + std::to_string(static_cast<unsigned>(rec.op_class)) + " out of range");
  if (rec.flags & TraceRecord::kFlagReservedMask)
    return fail("reserved-flag-bits", "reserved flag bits 4-7 must be zero");
  if (is_memory(rec.op_class) && rec.mem_addr == 0)
    return fail("memory-op-no-addr", "load/store record has mem_addr = 0");
  if (!is_memory(rec.op_class) && rec.mem_addr != 0)
    return fail("non-memory-op-addr", "non-memory record has mem_addr != 0");
  if (rec.trigger() && rec.wrong_path())
    return fail("nested-mis-speculation", "trigger flag set on a wrong-path record");
  if (is_uncond_direct(rec.op_class) && !rec.taken())
    return fail("uncond-direct-not-taken", "unconditional direct branch must be taken");
  if (rec.trigger() && rec.trigger_kind() == TriggerKind::branch_mispredict && !is_branch(rec.op_class))
    return fail("trigger-not-branch", "branch-mispredict trigger on a non-branch record");
  if (rec.trigger() && rec.trigger_kind() == TriggerKind::ls_disambiguation && rec.op_class != OpClass::load)
    return fail("trigger-not-load", "ls-disambiguation trigger on a non-load record");
  return {};
}

// --- writer ---

TraceWriter::TraceWriter(std::ostream& sink) : sink_(sink)
{
  unsigned char hdr[kHeaderBytes];
  encode_header(TraceHeader{}, hdr);
  sink_.write(reinterpret_cast<const char*>(hdr), kHeaderBytes);
  if (!sink_)
    throw TraceError("trace sink: header write failed");
}

TraceWriter::~TraceWriter()
{
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void TraceWriter::add(const TraceRecord& rec)
{
  std::string msg;
  auto rule = check_record(rec, &msg);
  if (!rule.empty())
    throw TraceError("record " + std::to_string(count_) + ": " + rule + ": " + msg);

  unsigned char buf[kRecordBytes];
  encode_record(rec, buf);
  sink_.write(reinterpret_cast<const char*>(buf), kRecordBytes);
  if (!sink_)
    throw TraceError("trace sink: write failed at record " + std::to_string(count_));
  any_wp_ = any_wp_ || rec.wrong_path();
  count_++;
}

uint64_t TraceWriter::finish()
{
  if (finished_)
    return count_;
  finished_ = true;

  TraceHeader hdr;
  hdr.record_count = count_;
  hdr.flags = any_wp_ ? kHeaderFlagHasWp : 0;
  unsigned char buf[kHeaderBytes];
  encode_header(hdr, buf);

  auto end = sink_.tellp();
  sink_.seekp(0);
  sink_.write(reinterpret_cast<const char*>(buf), kHeaderBytes);
  sink_.seekp(end);
  if (!sink_)
    throw TraceError("trace sink: header patch failed");
  return count_;
}

uint64_t write_trace(const std::vector<TraceRecord>& records, std::ostream& sink)
{
  TraceWriter w(sink);
  for (const auto& rec : records)
    w.add(rec);
  return w.finish();
}

uint64_t write_trace_file(const std::vector<TraceRecord>& records, const std::string& path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw TraceError("cannot open trace file for writing: " + path);
  return write_trace(records, out);
}

// --- reader ---

TraceReader::TraceReader(std::istream& source) : source_(source), hash_(fnv1a(nullptr, 0))
{
  unsigned char buf[kHeaderBytes];
  source_.read(reinterpret_cast<char*>(buf), kHeaderBytes);
  if (source_.gcount() != static_cast<std::streamsize>(kHeaderBytes))
    throw TraceError("truncated header (file shorter than 32 bytes)");
  hash_ = fnv1a(buf, kHeaderBytes, hash_);

  if (std::memcmp(buf, kTraceMagic.data(), 4) != 0)
    throw TraceError("bad magic (not a WPT1 trace)");
  uint32_t version = get_u32(buf + 4);
  if (version != kTraceVersion)
    throw TraceError("unsupported trace version " + std::to_string(version));
  header_.record_count = get_u64(buf + 8);
  header_.flags = get_u32(buf + 16);
  if (header_.flags & ~kHeaderFlagHasWp)
    throw TraceError("reserved header flag bits set");
  for (int i = 20; i < 32; i++)
    if (buf[i] != 0)
      throw TraceError("reserved header bytes nonzero");
}

std::optional<TraceRecord> TraceReader::next()
{
  if (count_ == header_.record_count)
    return std::nullopt;
  unsigned char buf[kRecordBytes];
  source_.read(reinterpret_cast<char*>(buf), kRecordBytes);
  if (source_.gcount() != static_cast<std::streamsize>(kRecordBytes))
    throw TraceError("truncated record " + std::to_string(count_));
  hash_ = fnv1a(buf, kRecordBytes, hash_);
  TraceRecord rec = decode_record(buf);
  if (rec.flags & TraceRecord::kFlagReservedMask)
    throw TraceError("record " + std::to_string(count_) + ": reserved flag bits set");
  for (int i = 33; i < 64; i++)
    if (buf[i] != 0)
      throw TraceError("record " + std::to_string(count_) + ": nonzero pad bytes");
  count_++;
  return rec;
}

TraceImage read_trace(std::istream& source)
{
  TraceReader r(source);
  TraceImage img;
  img.header = r.header();
  img.records.reserve(r.header().record_count);
  while (auto rec = r.next())
    img.records.push_back(*rec);
  img.content_hash = r.content_hash();
  return img;
}

TraceImage read_trace_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw TraceError("cannot open trace file: " + path);
  return read_trace(in);
}

// --- validator ---

namespace {

void add_violation(ValidationReport& rep, uint64_t ordinal, const std::string& rule, const std::string& msg)
{
  rep.violations.push_back(Violation{ordinal, rule, msg});
}

// Segment-structure pass over decoded records; shared by both validator entry
// points. Record-local checks are assumed done by the caller.
void validate_stream(ValidationReport& rep, const std::vector<TraceRecord>& records)
{
  bool in_segment = false;
  uint64_t seg_trigger = 0;
  uint64_t seg_len = 0;

  for (uint64_t i = 0; i < records.size(); i++) {
    const TraceRecord& rec = records[i];
    if (rec.wrong_path()) {
      rep.wp_records++;
      if (!in_segment) {
        add_violation(rep, i, "orphan-wp-record", "wrong-path record outside any segment");
        in_segment = true; // treat as an implicit segment so we report once
        seg_trigger = i;
        seg_len = 0;
      }
      if (rec.trigger())
        add_violation(rep, i, "nested-mis-speculation", "trigger flag inside a WP segment");
      seg_len++;
    } else {
      rep.cp_records++;
      if (in_segment) {
        in_segment = false;
        seg_len = 0;
      }
      if (rec.trigger()) {
        bool has_wp_next = (i + 1 < records.size()) && records[i + 1].wrong_path();
        if (!has_wp_next) {
          add_violation(rep, i, "empty-wp-segment", "trigger record with no wrong-path successor");
        } else {
          in_segment = true;
          seg_trigger = i;
          seg_len = 0;
          if (rec.trigger_kind() == TriggerKind::branch_mispredict)
            rep.segments_branch++;
          else
            rep.segments_ls++;
        }
      }
    }
  }
  if (in_segment)
    add_violation(rep, seg_trigger, "unterminated-wp-segment", "segment at end of file has no correct-path successor");
}

} // namespace

ValidationReport validate_records(const TraceHeader& header, const std::vector<TraceRecord>& records)
{
  ValidationReport rep;

  if (header.record_count != records.size())
    add_violation(rep, UINT64_MAX, "header-record-count",
                  "header says " + std::to_string(header.record_count) + " records, file has " + std::to_string(records.size()));

  bool any_wp = false;
  for (uint64_t i = 0; i < records.size(); i++) {
    std::string msg;
    auto rule = check_record(records[i], &msg);
    if (!rule.empty())
      add_violation(rep, i, rule, msg);
    any_wp = any_wp || records[i].wrong_path();
  }
  if (any_wp && !header.contains_wp_segments())
    add_violation(rep, UINT64_MAX, "header-wp-flag", "contains_wp_segments clear but WP records present");
  if (!any_wp && header.contains_wp_segments())
    add_violation(rep, UINT64_MAX, "header-wp-flag", "contains_wp_segments set but no WP records present");

  validate_stream(rep, records);
  return rep;
}

ValidationReport validate_trace(std::istream& source)
{
  ValidationReport rep;

  // Lenient header parse: problems are data here, not exceptions.
  unsigned char hbuf[kHeaderBytes];
  source.read(reinterpret_cast<char*>(hbuf), kHeaderBytes);
  if (source.gcount() != static_cast<std::streamsize>(kHeaderBytes)) {
    add_violation(rep, UINT64_MAX, "truncated-header", "file shorter than 32 bytes");
    return rep;
  }
  TraceHeader header;
  if (std::memcmp(hbuf, kTraceMagic.data(), 4) != 0) {
    add_violation(rep, UINT64_MAX, "bad-magic", "magic bytes are not \"WPT1\"");
    return rep;
  }
  uint32_t version = get_u32(hbuf + 4);
  if (version != kTraceVersion) {
    add_violation(rep, UINT64_MAX, "bad-version", "unsupported version " + std::to_string(version));
    return rep;
  }
  header.record_count = get_u64(hbuf + 8);
  header.flags = get_u32(hbuf + 16);
  if (header.flags & ~kHeaderFlagHasWp)
    add_violation(rep, UINT64_MAX, "reserved-header-flags", "reserved header flag bits set");
  for (int i = 20; i < 32; i++)
    if (hbuf[i] != 0) {
      add_violation(rep, UINT64_MAX, "reserved-header-bytes", "reserved header bytes nonzero");
      break;
    }

  std::vector<TraceRecord> records;
  if (header.record_count < (1ull << 32))
    records.reserve(header.record_count);
  unsigned char buf[kRecordBytes];
  for (uint64_t i = 0;; i++) {
    source.read(reinterpret_cast<char*>(buf), kRecordBytes);
    auto got = source.gcount();
    if (got == 0)
      break;
    if (got != static_cast<std::streamsize>(kRecordBytes)) {
      add_violation(rep, i, "truncated-record", "file ends mid-record " + std::to_string(i));
      break;
    }
    records.push_back(decode_record(buf));
    for (int b = 33; b < 64; b++)
      if (buf[b] != 0) {
        add_violation(rep, i, "nonzero-pad", "record pad bytes nonzero");
        break;
      }
  }

  auto body = validate_records(header, records);
  rep.cp_records = body.cp_records;
  rep.wp_records = body.wp_records;
  rep.segments_branch = body.segments_branch;
  rep.segments_ls = body.segments_ls;
  rep.violations.insert(rep.violations.end(), body.violations.begin(), body.violations.end());
  return rep;
}

ValidationReport validate_trace_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw TraceError("cannot open trace file: " + path);
  return validate_trace(in);
}

std::string ValidationReport::to_json_lines() const
{
  std::ostringstream out;
  for (const auto& v : violations) {
    nlohmann::ordered_json j;
    if (v.ordinal == UINT64_MAX)
      j["ordinal"] = nullptr;
    else
      j["ordinal"] = v.ordinal;
    j["rule"] = v.rule;
    j["message"] = v.message;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::string ValidationReport::summary_json() const
{
  nlohmann::ordered_json j;
  j["cp_records"] = cp_records;
  j["wp_records"] = wp_records;
  j["segments_branch"] = segments_branch;
  j["segments_ls"] = segments_ls;
  j["violations"] = violations.size();
  return j.dump();
}

// --- segment view ---

SegmentView segment_view(const std::vector<TraceRecord>& records)
{
  SegmentView view;
  view.cp_stream.reserve(records.size());

  uint64_t i = 0;
  while (i < records.size()) {
    const TraceRecord& rec = records[i];
    if (rec.wrong_path())
      throw TraceError("segment_view: orphan wrong-path record at " + std::to_string(i) + " (trace does not validate)");
    uint64_t cp_index = view.cp_stream.size();
    view.cp_stream.push_back(rec);
    i++;
    if (rec.trigger()) {
      WpSegment seg;
      seg.trigger_index = cp_index;
      seg.kind = rec.trigger_kind();
      while (i < records.size() && records[i].wrong_path()) {
        seg.records.push_back(records[i]);
        i++;
      }
      if (seg.records.empty())
        throw TraceError("segment_view: empty segment after trigger at record " + std::to_string(i - 1));
      view.segments.emplace(cp_index, std::move(seg));
    }
  }
  return view;
}

} // namespace wpsim
