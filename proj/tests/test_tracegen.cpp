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

#include "wpsim/rng.hpp"
#include "wpsim/trace.hpp"
#include "wpsim/tracegen.hpp"

using namespace wpsim;

namespace {

uint64_t trace_bytes_hash(const std::vector<TraceRecord>& recs)
{
  std::ostringstream out(std::ios::binary);
  write_trace(recs, out);
  std::string s = out.str();
  return fnv1a(s.data(), s.size());
}

WorkloadSpec small_spec(uint64_t seed)
{
  WorkloadSpec s;
  s.seed = seed;
  s.instr_count = 10000;
  s.n_blocks = 32;
  return s;
}

} // namespace

TEST_CASE("same spec twice gives byte-identical traces")
{
  WorkloadSpec spec = small_spec(42);
  auto a = generate(spec);
  auto b = generate(spec);
  CHECK(trace_bytes_hash(a.records) == trace_bytes_hash(b.records));
  CHECK(a.records.size() == b.records.size());

  spec.seed = 43;
  auto c = generate(spec);
  CHECK(trace_bytes_hash(c.records) != trace_bytes_hash(a.records));
}

TEST_CASE("oracle predictor emits no wrong path at all")
{
  WorkloadSpec spec = small_spec(3);
  spec.predictor = EmbeddedPredictor::oracle;
  auto gen = generate(spec);
  CHECK(!gen.header.contains_wp_segments());
  for (const auto& r : gen.records) {
    CHECK(!r.wrong_path());
    CHECK(!r.trigger());
  }
  CHECK(gen.records.size() == spec.instr_count);
}

TEST_CASE("generated traces always validate")
{
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    WorkloadSpec spec = small_spec(seed);
    spec.predictor = seed == 2 ? EmbeddedPredictor::gshare : EmbeddedPredictor::bimodal;
    spec.ls_trigger_prob = seed == 3 ? 0.01 : 0.0;
    spec.indirect_fraction = 0.1;
    auto gen = generate(spec);
    auto rep = validate_records(gen.header, gen.records);
    CHECK(rep.ok());
    // CP count within the one-record terminal allowance
    CHECK(rep.cp_records >= spec.instr_count);
    CHECK(rep.cp_records <= spec.instr_count + 1);
  }
}

TEST_CASE("always-taken branches stop mispredicting after bimodal warm-up")
{
  WorkloadSpec spec;
  spec.seed = 5;
  spec.instr_count = 20000;
  spec.n_blocks = 16;
  spec.call_depth_max = 2;
  // Kumaraswamy with b -> 0 degenerates to taken-probability 1.0
  spec.cond_bias_a = 1.0;
  spec.cond_bias_b = 1e-9;
  spec.indirect_fraction = 0.0;
  spec.predictor = EmbeddedPredictor::bimodal;
  auto gen = generate(spec);

  // 2-bit counters saturate after one taken outcome per site, so the second
  // half of the trace must not contain any new triggers
  uint64_t cp_seen = 0, late_triggers = 0;
  for (const auto& r : gen.records) {
    if (r.wrong_path())
      continue;
    cp_seen++;
    if (cp_seen > spec.instr_count / 2 && r.trigger())
      late_triggers++;
  }
  CHECK(late_triggers == 0);
}

TEST_CASE("segment length never exceeds wp_depth_limit")
{
  WorkloadSpec spec = small_spec(9);
  spec.wp_depth_limit = 32;
  auto gen = generate(spec);
  auto view = segment_view(gen.records);
  REQUIRE(!view.segments.empty());
  for (const auto& [idx, seg] : view.segments)
    CHECK(seg.records.size() <= spec.wp_depth_limit);
}

TEST_CASE("CP record stream does not depend on the embedded predictor")
{
  auto cp_stream_masked = [](const std::vector<TraceRecord>& recs) {
    std::vector<TraceRecord> cp;
    for (auto r : recs) {
      if (r.wrong_path())
        continue;
      // the trigger mark is the only predictor-dependent part of a CP record
      r.flags &= static_cast<uint8_t>(~(TraceRecord::kFlagTrigger | TraceRecord::kFlagTriggerKind));
      cp.push_back(r);
    }
    return cp;
  };

  WorkloadSpec spec = small_spec(17);
  spec.ls_trigger_prob = 0.005;

  spec.predictor = EmbeddedPredictor::oracle;
  auto oracle_cp = cp_stream_masked(generate(spec).records);
  spec.predictor = EmbeddedPredictor::bimodal;
  auto bimodal_cp = cp_stream_masked(generate(spec).records);
  spec.predictor = EmbeddedPredictor::gshare;
  auto gshare_cp = cp_stream_masked(generate(spec).records);

  // the bimodal/gshare streams may carry one extra terminal record
  REQUIRE(bimodal_cp.size() >= oracle_cp.size());
  for (size_t i = 0; i < oracle_cp.size(); i++) {
    REQUIRE(bimodal_cp[i] == oracle_cp[i]);
    REQUIRE(gshare_cp[i] == oracle_cp[i]);
  }
}

TEST_CASE("mix parameter scales trigger density down to zero")
{
  WorkloadSpec spec = small_spec(23);
  spec.predictor = EmbeddedPredictor::bimodal;

  uint64_t last = UINT64_MAX;
  for (double mix : {1.0, 0.5, 0.0}) {
    spec.mix = mix;
    auto gen = generate(spec);
    auto rep = describe(spec, gen.records);
    uint64_t triggers = rep.mispredict_triggers + rep.ls_triggers;
    CHECK(triggers <= last);
    last = triggers;
    if (mix == 0.0)
      CHECK(triggers == 0);
  }
}

TEST_CASE("unsatisfiable specs are rejected")
{
  WorkloadSpec spec = small_spec(1);
  SUBCASE("n_blocks too small for call_depth_max")
  {
    spec.n_blocks = 8;
    spec.call_depth_max = 4;
    CHECK_THROWS_WITH_AS(generate(spec), doctest::Contains("n_blocks too small"), ConfigError);
  }
  SUBCASE("fractions out of range")
  {
    spec.load_fraction = 0.8;
    spec.store_fraction = 0.4;
    CHECK_THROWS_AS(generate(spec), ConfigError);
  }
  SUBCASE("zero depth limit")
  {
    spec.wp_depth_limit = 0;
    CHECK_THROWS_AS(generate(spec), ConfigError);
  }
}

TEST_CASE("describe cross-checks against the validator")
{
  WorkloadSpec spec = small_spec(31);
  spec.ls_trigger_prob = 0.01;
  auto gen = generate(spec);
  auto rep = describe(spec, gen.records);

  std::ostringstream out(std::ios::binary);
  write_trace(gen.records, out);
  std::istringstream in(out.str());
  auto val = validate_trace(in);

  CHECK(rep.cp_records == val.cp_records);
  CHECK(rep.wp_records == val.wp_records);
  CHECK(rep.mispredict_triggers == val.segments_branch);
  CHECK(rep.ls_triggers == val.segments_ls);
  CHECK(rep.mispredict_density_per_ki ==
        doctest::Approx(1000.0 * double(val.segments()) / double(val.cp_records)));

  uint64_t hist_total = 0;
  for (auto& [len, n] : rep.segment_length_hist)
    hist_total += n;
  CHECK(hist_total == val.segments());

  CHECK(rep.mispredict_density_per_ki > 0.0);
}

TEST_CASE("describe on an oracle trace reports zero density")
{
  WorkloadSpec spec = small_spec(2);
  spec.predictor = EmbeddedPredictor::oracle;
  auto gen = generate(spec);
  auto rep = describe(spec, gen.records);
  CHECK(rep.mispredict_density_per_ki == 0.0);
  CHECK(rep.segment_length_hist.empty());
  CHECK(rep.wp_records == 0);
}

TEST_CASE("workload configs parse with strict keys")
{
  auto cfg = KvConfig::parse_text("seed = 9\ninstr_count = 500\nn_blocks = 16\npredictor = gshare\n");
  WorkloadSpec spec = WorkloadSpec::from_config(cfg);
  CHECK(spec.seed == 9);
  CHECK(spec.predictor == EmbeddedPredictor::gshare);

  auto bad = KvConfig::parse_text("seed = 9\nnot_a_key = 3\n");
  CHECK_THROWS_WITH_AS(WorkloadSpec::from_config(bad), doctest::Contains("not_a_key"), ConfigError);

  auto badpred = KvConfig::parse_text("predictor = tage\n");
  CHECK_THROWS_AS(WorkloadSpec::from_config(badpred), ConfigError);
}
