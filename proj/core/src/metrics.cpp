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

#include "wpsim/metrics.hpp"

#include <fstream>
#include <sstream>

namespace wpsim {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<const char*, 4> kLevels{"l1i", "l1d", "l2", "llc"};
constexpr std::array<const char*, kAccessKinds> kKindNames{"ifetch", "load", "store_addr", "prefetch"};
constexpr std::array<const char*, kAttributions> kAttrNames{"cp", "wp"};
constexpr std::array<const char*, kFillOrigins> kOriginNames{"cp_demand", "wp_demand", "ftq_prefetch_cp", "ftq_prefetch_wp"};

json level_to_json(const LevelStats& s)
{
  json j;
  json hits, misses;
  for (size_t k = 0; k < kAccessKinds; k++)
    for (size_t a = 0; a < kAttributions; a++) {
      std::string key = std::string(kKindNames[k]) + "_" + kAttrNames[a];
      hits[key] = s.hits[k][a];
      misses[key] = s.misses[k][a];
    }
  j["hits"] = hits;
  j["misses"] = misses;
  json fills;
  for (size_t o = 0; o < kFillOrigins; o++)
    fills[kOriginNames[o]] = s.fills[o];
  j["fills"] = fills;
  j["useful_wp_fills"] = s.useful_wp_fills;
  j["useless_wp_fills"] = s.useless_wp_fills;
  j["wp_resident_unused"] = s.wp_resident_unused;
  j["evictions"] = s.evictions;
  j["mshr_merges"] = s.mshr_merges;
  j["prefetch_drops"] = s.prefetch_drops;
  return j;
}

LevelStats level_from_json(const json& j)
{
  LevelStats s;
  for (size_t k = 0; k < kAccessKinds; k++)
    for (size_t a = 0; a < kAttributions; a++) {
      std::string key = std::string(kKindNames[k]) + "_" + kAttrNames[a];
      s.hits[k][a] = j.at("hits").at(key).get<uint64_t>();
      s.misses[k][a] = j.at("misses").at(key).get<uint64_t>();
    }
  for (size_t o = 0; o < kFillOrigins; o++)
    s.fills[o] = j.at("fills").at(kOriginNames[o]).get<uint64_t>();
  s.useful_wp_fills = j.at("useful_wp_fills").get<uint64_t>();
  s.useless_wp_fills = j.at("useless_wp_fills").get<uint64_t>();
  s.wp_resident_unused = j.at("wp_resident_unused").get<uint64_t>();
  s.evictions = j.at("evictions").get<uint64_t>();
  s.mshr_merges = j.at("mshr_merges").get<uint64_t>();
  s.prefetch_drops = j.at("prefetch_drops").get<uint64_t>();
  return s;
}

std::string hex64(uint64_t v)
{
  std::ostringstream ss;
  ss << "0x" << std::hex << v;
  return ss.str();
}

uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

double pct_delta(double num, double den)
{
  if (den == 0.0)
    return 0.0; // no baseline traffic: report no change
  return 100.0 * (num / den - 1.0);
}

} // namespace

double RunStats::mean_rob_occupancy_at_mispredict() const
{
  uint64_t events = 0, sum = 0;
  for (auto& [occ, n] : rob_occupancy_at_mispredict) {
    events += n;
    sum += occ * n;
  }
  return events ? static_cast<double>(sum) / static_cast<double>(events) : 0.0;
}

json RunStats::to_json() const
{
  json j;
  j["schema"] = "wpsim.runstats.v1";
  j["mode"] = mode;
  j["trace_hash"] = hex64(trace_hash);
  j["config_identity_hash"] = hex64(config_identity_hash);
  j["cycles"] = cycles;
  j["retired_cp_instructions"] = retired_cp_instructions;
  j["ipc"] = ipc();
  j["fetched"] = json{{"cp", fetched_cp}, {"wp", fetched_wp}};
  j["renamed"] = json{{"cp", renamed_cp}, {"wp", renamed_wp}};
  j["decode_resteers"] = decode_resteers;
  j["execute_resteers"] = execute_resteers;
  j["no_segment_mispredicts"] = no_segment_mispredicts;
  j["wp_fetch_idle_cycles"] = wp_fetch_idle_cycles;
  j["rob_full_events"] = rob_full_events;
  json hist = json::object();
  for (auto& [occ, n] : rob_occupancy_at_mispredict)
    hist[std::to_string(occ)] = n;
  j["rob_occupancy_at_mispredict"] = json{{"mean", mean_rob_occupancy_at_mispredict()}, {"histogram", hist}};
  j["branch"] = json{{"predictions", branch_predictions}, {"mispredictions", branch_mispredictions}, {"mpki", mpki()}};
  j["segments_played"] = segments_played;
  j["segments_skipped"] = segments_skipped;
  j["squash_scan_violations"] = squash_scan_violations;
  json c;
  for (const char* lvl : kLevels) {
    auto it = cache.find(lvl);
    c[lvl] = level_to_json(it != cache.end() ? it->second : LevelStats{});
  }
  j["cache"] = c;
  json echo = json::object();
  for (auto& [k, v] : config_echo)
    echo[k] = v;
  j["config"] = echo;
  return j;
}

RunStats RunStats::from_json(const json& j)
{
  if (j.value("schema", "") != "wpsim.runstats.v1")
    throw MetricsError("not a wpsim.runstats.v1 document");
  RunStats s;
  s.mode = j.at("mode").get<std::string>();
  s.trace_hash = parse_hex64(j.at("trace_hash").get<std::string>());
  s.config_identity_hash = parse_hex64(j.at("config_identity_hash").get<std::string>());
  s.cycles = j.at("cycles").get<uint64_t>();
  s.retired_cp_instructions = j.at("retired_cp_instructions").get<uint64_t>();
  s.fetched_cp = j.at("fetched").at("cp").get<uint64_t>();
  s.fetched_wp = j.at("fetched").at("wp").get<uint64_t>();
  s.renamed_cp = j.at("renamed").at("cp").get<uint64_t>();
  s.renamed_wp = j.at("renamed").at("wp").get<uint64_t>();
  s.decode_resteers = j.at("decode_resteers").get<uint64_t>();
  s.execute_resteers = j.at("execute_resteers").get<uint64_t>();
  s.no_segment_mispredicts = j.at("no_segment_mispredicts").get<uint64_t>();
  s.wp_fetch_idle_cycles = j.at("wp_fetch_idle_cycles").get<uint64_t>();
  s.rob_full_events = j.at("rob_full_events").get<uint64_t>();
  for (auto& [k, v] : j.at("rob_occupancy_at_mispredict").at("histogram").items())
    s.rob_occupancy_at_mispredict[std::stoull(k)] = v.get<uint64_t>();
  s.branch_predictions = j.at("branch").at("predictions").get<uint64_t>();
  s.branch_mispredictions = j.at("branch").at("mispredictions").get<uint64_t>();
  s.segments_played = j.at("segments_played").get<uint64_t>();
  s.segments_skipped = j.at("segments_skipped").get<uint64_t>();
  s.squash_scan_violations = j.at("squash_scan_violations").get<uint64_t>();
  for (const char* lvl : kLevels)
    s.cache[lvl] = level_from_json(j.at("cache").at(lvl));
  for (auto& [k, v] : j.at("config").items())
    s.config_echo[k] = v.get<std::string>();
  return s;
}

std::string RunStats::csv_header()
{
  std::ostringstream h;
  h << "mode,trace_hash,config_identity_hash,cycles,retired_cp_instructions,ipc,"
       "fetched_cp,fetched_wp,renamed_cp,renamed_wp,decode_resteers,execute_resteers,"
       "no_segment_mispredicts,wp_fetch_idle_cycles,rob_full_events,rob_occ_at_mispredict_mean,"
       "branch_predictions,branch_mispredictions,mpki,segments_played,segments_skipped,squash_scan_violations";
  for (const char* lvl : kLevels) {
    h << "," << lvl << "_hits," << lvl << "_misses," << lvl << "_hits_cp_attr," << lvl << "_misses_cp_attr," << lvl << "_wp_fills," << lvl
      << "_useful_wp_fills," << lvl << "_useless_wp_fills," << lvl << "_wp_resident_unused," << lvl << "_evictions," << lvl << "_mshr_merges";
  }
  return h.str();
}

std::string RunStats::csv_row() const
{
  std::ostringstream r;
  r << mode << "," << hex64(trace_hash) << "," << hex64(config_identity_hash) << "," << cycles << "," << retired_cp_instructions << "," << ipc() << ","
    << fetched_cp << "," << fetched_wp << "," << renamed_cp << "," << renamed_wp << "," << decode_resteers << "," << execute_resteers << ","
    << no_segment_mispredicts << "," << wp_fetch_idle_cycles << "," << rob_full_events << "," << mean_rob_occupancy_at_mispredict() << ","
    << branch_predictions << "," << branch_mispredictions << "," << mpki() << "," << segments_played << "," << segments_skipped << ","
    << squash_scan_violations;
  for (const char* lvl : kLevels) {
    LevelStats s;
    if (auto it = cache.find(lvl); it != cache.end())
      s = it->second;
    uint64_t hits_cp = 0, misses_cp = 0;
    for (size_t k = 0; k < kAccessKinds; k++) {
      hits_cp += s.hits[k][0];
      misses_cp += s.misses[k][0];
    }
    r << "," << s.total_hits() << "," << s.total_misses() << "," << hits_cp << "," << misses_cp << "," << s.total_wp_origin_fills() << ","
      << s.useful_wp_fills << "," << s.useless_wp_fills << "," << s.wp_resident_unused << "," << s.evictions << "," << s.mshr_merges;
  }
  return r.str();
}

CompareReport compare(const RunStats& wp, const RunStats& cp)
{
  if (wp.mode != "wp" || cp.mode != "cp")
    throw MetricsError("compare: arguments must be a WP run and a CP run, in that order");
  if (wp.trace_hash != cp.trace_hash)
    throw MetricsError("compare: trace hashes differ (runs are not over the same trace)");
  if (wp.config_identity_hash != cp.config_identity_hash)
    throw MetricsError("compare: configurations differ beyond the mode");
  if (wp.cycles == 0 || cp.cycles == 0 || wp.retired_cp_instructions == 0 || cp.retired_cp_instructions == 0)
    throw MetricsError("compare: empty run (zero cycles or retired instructions)");

  CompareReport r;
  r.trace_hash = wp.trace_hash;
  r.ipc_wp = wp.ipc();
  r.ipc_cp = cp.ipc();
  r.ipc_speedup_pct = 100.0 * (r.ipc_wp / r.ipc_cp - 1.0);

  double fetched_wp_total = static_cast<double>(wp.fetched_cp + wp.fetched_wp);
  double fetched_cp_total = static_cast<double>(cp.fetched_cp + cp.fetched_wp);
  if (fetched_cp_total == 0.0)
    throw MetricsError("compare: CP run fetched nothing");
  r.rel_instruction_increase_pct = 100.0 * (fetched_wp_total / fetched_cp_total - 1.0);
  r.mpki = cp.mpki();

  for (const char* lvl : kLevels) {
    auto wit = wp.cache.find(lvl);
    auto cit = cp.cache.find(lvl);
    if (wit == wp.cache.end() || cit == cp.cache.end())
      continue;
    const LevelStats& w = wit->second;
    const LevelStats& c = cit->second;
    LevelDelta d;
    d.hit_delta_pct = pct_delta(static_cast<double>(w.total_hits()), static_cast<double>(c.total_hits()));
    d.miss_delta_pct = pct_delta(static_cast<double>(w.total_misses()), static_cast<double>(c.total_misses()));

    uint64_t w_cp_misses = 0;
    for (size_t k = 0; k < kAccessKinds; k++)
      w_cp_misses += w.misses[k][static_cast<size_t>(Attribution::cp)];
    uint64_t c_misses = c.total_misses();
    d.cp_miss_reduction_pct = c_misses ? 100.0 * (1.0 - static_cast<double>(w_cp_misses) / static_cast<double>(c_misses)) : 0.0;

    uint64_t wp_fills = w.total_wp_origin_fills();
    d.useful_wp_fill_fraction = wp_fills ? static_cast<double>(w.useful_wp_fills) / static_cast<double>(wp_fills) : 0.0;
    r.cache[lvl] = d;
  }
  return r;
}

json CompareReport::to_json() const
{
  json j;
  j["schema"] = "wpsim.compare.v1";
  j["trace_hash"] = hex64(trace_hash);
  j["ipc_wp"] = ipc_wp;
  j["ipc_cp"] = ipc_cp;
  j["ipc_speedup_pct"] = ipc_speedup_pct;
  j["rel_instruction_increase_pct"] = rel_instruction_increase_pct;
  j["mpki"] = mpki;
  json c;
  for (const char* lvl : kLevels) {
    auto it = cache.find(lvl);
    if (it == cache.end())
      continue;
    const LevelDelta& d = it->second;
    c[lvl] = json{{"hit_delta_pct", d.hit_delta_pct},
                  {"miss_delta_pct", d.miss_delta_pct},
                  {"cp_miss_reduction_pct", d.cp_miss_reduction_pct},
                  {"useful_wp_fill_fraction", d.useful_wp_fill_fraction}};
  }
  j["cache"] = c;
  return j;
}

CompareReport CompareReport::from_json(const json& j)
{
  if (j.value("schema", "") != "wpsim.compare.v1")
    throw MetricsError("not a wpsim.compare.v1 document");
  CompareReport r;
  r.trace_hash = parse_hex64(j.at("trace_hash").get<std::string>());
  r.ipc_wp = j.at("ipc_wp").get<double>();
  r.ipc_cp = j.at("ipc_cp").get<double>();
  r.ipc_speedup_pct = j.at("ipc_speedup_pct").get<double>();
  r.rel_instruction_increase_pct = j.at("rel_instruction_increase_pct").get<double>();
  r.mpki = j.at("mpki").get<double>();
  for (auto& [lvl, v] : j.at("cache").items()) {
    LevelDelta d;
    d.hit_delta_pct = v.at("hit_delta_pct").get<double>();
    d.miss_delta_pct = v.at("miss_delta_pct").get<double>();
    d.cp_miss_reduction_pct = v.at("cp_miss_reduction_pct").get<double>();
    d.useful_wp_fill_fraction = v.at("useful_wp_fill_fraction").get<double>();
    r.cache[lvl] = d;
  }
  return r;
}

std::string CompareReport::csv_header()
{
  std::ostringstream h;
  h << "trace_hash,ipc_wp,ipc_cp,ipc_speedup_pct,rel_instruction_increase_pct,mpki";
  for (const char* lvl : kLevels)
    h << "," << lvl << "_hit_delta_pct," << lvl << "_miss_delta_pct," << lvl << "_cp_miss_reduction_pct," << lvl << "_useful_wp_fill_fraction";
  return h.str();
}

std::string CompareReport::csv_row() const
{
  std::ostringstream r;
  r << hex64(trace_hash) << "," << ipc_wp << "," << ipc_cp << "," << ipc_speedup_pct << "," << rel_instruction_increase_pct << "," << mpki;
  for (const char* lvl : kLevels) {
    LevelDelta d;
    if (auto it = cache.find(lvl); it != cache.end())
      d = it->second;
    r << "," << d.hit_delta_pct << "," << d.miss_delta_pct << "," << d.cp_miss_reduction_pct << "," << d.useful_wp_fill_fraction;
  }
  return r.str();
}

std::string emit(const RunStats& stats, EmitFormat fmt)
{
  if (fmt == EmitFormat::json)
    return stats.to_json().dump(2) + "\n";
  return RunStats::csv_header() + "\n" + stats.csv_row() + "\n";
}

std::string emit(const CompareReport& report, EmitFormat fmt)
{
  if (fmt == EmitFormat::json)
    return report.to_json().dump(2) + "\n";
  return CompareReport::csv_header() + "\n" + report.csv_row() + "\n";
}

std::string emit_csv(const std::vector<RunStats>& rows)
{
  std::ostringstream out;
  out << RunStats::csv_header() << "\n";
  for (const auto& r : rows)
    out << r.csv_row() << "\n";
  return out.str();
}

RunStats load_run_stats(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw MetricsError("cannot open stats file: " + path);
  json j = json::parse(in);
  return RunStats::from_json(j);
}

void write_text_file(const std::string& path, const std::string& content)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw MetricsError("cannot open output file: " + path);
  out << content;
  if (!out)
    throw MetricsError("write failed: " + path);
}

} // namespace wpsim
