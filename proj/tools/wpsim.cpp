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

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wpsim/core.hpp"
#include "wpsim/metrics.hpp"
#include "wpsim/rng.hpp"
#include "wpsim/sim_config.hpp"
#include "wpsim/trace.hpp"
#include "wpsim/tracegen.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSimAssert = 3;

wpsim::SimConfig load_sim_config(const std::string& path, const std::string& mode_flag)
{
  wpsim::SimConfig cfg = path.empty() ? wpsim::SimConfig{} : wpsim::SimConfig::from_file(path);
  if (!mode_flag.empty()) {
    if (mode_flag == "wp")
      cfg.mode = wpsim::SimMode::wp;
    else if (mode_flag == "cp")
      cfg.mode = wpsim::SimMode::cp;
    else
      throw wpsim::ConfigError("--mode must be wp or cp");
  }
  return cfg;
}

int cmd_gen(const std::string& config_path, const std::string& out_path, int64_t seed_override, const std::string& report_path)
{
  wpsim::WorkloadSpec spec = wpsim::WorkloadSpec::from_file(config_path);
  if (seed_override >= 0)
    spec.seed = static_cast<uint64_t>(seed_override);

  wpsim::GeneratedTrace gen = wpsim::generate(spec);
  uint64_t n = wpsim::write_trace_file(gen.records, out_path);

  wpsim::GeneratorReport rep = wpsim::describe(spec, gen.records);
  if (!report_path.empty())
    wpsim::write_text_file(report_path, rep.to_json() + "\n");
  std::cout << "wrote " << out_path << ": " << n << " records (" << rep.cp_records << " CP, " << rep.wp_records << " WP, "
            << rep.mispredict_triggers + rep.ls_triggers << " segments)" << std::endl;
  return kExitOk;
}

int cmd_validate(const std::string& trace_path, bool json_out)
{
  wpsim::ValidationReport rep = wpsim::validate_trace_file(trace_path);
  if (json_out) {
    std::cout << rep.summary_json() << "\n" << rep.to_json_lines();
  } else {
    std::cout << "cp_records=" << rep.cp_records << " wp_records=" << rep.wp_records << " segments_branch=" << rep.segments_branch
              << " segments_ls=" << rep.segments_ls << " violations=" << rep.violations.size() << std::endl;
    std::cout << rep.to_json_lines();
  }
  return rep.ok() ? kExitOk : kExitValidation;
}

int cmd_run(const std::string& trace_path, const std::string& config_path, const std::string& mode_flag, const std::string& out_path,
            const std::string& format)
{
  wpsim::SimConfig cfg = load_sim_config(config_path, mode_flag);
  wpsim::TraceImage trace = wpsim::read_trace_file(trace_path);
  wpsim::RunStats stats = wpsim::run_trace(trace, cfg);

  std::string text = wpsim::emit(stats, format == "csv" ? wpsim::EmitFormat::csv : wpsim::EmitFormat::json);
  if (out_path.empty())
    std::cout << text;
  else
    wpsim::write_text_file(out_path, text);
  std::cerr << "mode=" << stats.mode << " retired=" << stats.retired_cp_instructions << " cycles=" << stats.cycles << " ipc=" << stats.ipc()
            << std::endl;
  return kExitOk;
}

int cmd_compare(const std::string& wp_path, const std::string& cp_path, const std::string& out_path, const std::string& format)
{
  wpsim::RunStats wp = wpsim::load_run_stats(wp_path);
  wpsim::RunStats cp = wpsim::load_run_stats(cp_path);
  wpsim::CompareReport rep = wpsim::compare(wp, cp);

  std::string text = wpsim::emit(rep, format == "csv" ? wpsim::EmitFormat::csv : wpsim::EmitFormat::json);
  if (out_path.empty())
    std::cout << text;
  else
    wpsim::write_text_file(out_path, text);
  return kExitOk;
}

struct SweepTask {
  uint64_t seed = 0;
  std::string trace_path; // either a pre-made trace or a per-seed generated one
  std::string config_path;
  wpsim::SimMode mode = wpsim::SimMode::wp;
};

int cmd_sweep(const std::string& workload_path, const std::vector<std::string>& trace_paths, const std::vector<std::string>& config_paths,
              const std::vector<uint64_t>& seeds, const std::vector<std::string>& modes, unsigned jobs, const std::string& out_path)
{
  if (trace_paths.empty() && workload_path.empty())
    throw wpsim::ConfigError("sweep needs either --workload (with --seeds) or --trace file(s)");
  if (config_paths.empty())
    throw wpsim::ConfigError("sweep needs at least one --config");

  std::vector<wpsim::SimMode> mode_list;
  for (const auto& m : modes)
    mode_list.push_back(m == "cp" ? wpsim::SimMode::cp : wpsim::SimMode::wp);
  if (mode_list.empty())
    mode_list = {wpsim::SimMode::wp, wpsim::SimMode::cp};

  // Pre-generate or load every trace once; runs share them read-only.
  std::vector<wpsim::TraceImage> images;
  std::vector<std::string> image_names;
  if (!trace_paths.empty()) {
    for (const auto& p : trace_paths) {
      images.push_back(wpsim::read_trace_file(p));
      image_names.push_back(p);
    }
  } else {
    wpsim::WorkloadSpec base = wpsim::WorkloadSpec::from_file(workload_path);
    std::vector<uint64_t> seed_list = seeds.empty() ? std::vector<uint64_t>{base.seed} : seeds;
    for (uint64_t s : seed_list) {
      wpsim::WorkloadSpec spec = base;
      spec.seed = s;
      wpsim::GeneratedTrace gen = wpsim::generate(spec);
      images.push_back(wpsim::make_image(gen.header, std::move(gen.records)));
      image_names.push_back("seed:" + std::to_string(s));
    }
  }

  struct Row {
    std::string key;
    wpsim::RunStats stats;
  };
  std::vector<SweepTask> tasks;
  std::vector<size_t> task_image;
  for (size_t t = 0; t < images.size(); t++)
    for (const auto& cfg_path : config_paths)
      for (auto mode : mode_list) {
        SweepTask task;
        task.trace_path = image_names[t];
        task.config_path = cfg_path;
        task.mode = mode;
        tasks.push_back(task);
        task_image.push_back(t);
      }

  std::vector<Row> rows(tasks.size());
  std::atomic<size_t> next{0};
  std::mutex err_mutex;
  std::vector<std::string> errors;

  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size())
        return;
      try {
        wpsim::SimConfig cfg = load_sim_config(tasks[i].config_path, "");
        cfg.mode = tasks[i].mode;
        wpsim::RunStats stats = wpsim::run_trace(images[task_image[i]], cfg);
        std::ostringstream key;
        key << tasks[i].trace_path << "|0x" << std::hex << stats.config_identity_hash << std::dec << "|" << wpsim::to_string(tasks[i].mode);
        rows[i] = Row{key.str(), std::move(stats)};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        errors.push_back(tasks[i].trace_path + " [" + wpsim::to_string(tasks[i].mode) + "]: " + e.what());
      }
    }
  };

  unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; t++)
    pool.emplace_back(worker);
  for (auto& th : pool)
    th.join();

  if (!errors.empty()) {
    for (const auto& e : errors)
      std::cerr << "sweep: " << e << std::endl;
    return kExitSimAssert;
  }

  // rows keyed by (trace, config hash, mode), sorted so the CSV is stable
  // regardless of the parallelism degree
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.key < b.key; });
  std::ostringstream csv;
  csv << "key," << wpsim::RunStats::csv_header() << "\n";
  for (const auto& r : rows)
    csv << r.key << "," << r.stats.csv_row() << "\n";

  if (out_path.empty())
    std::cout << csv.str();
  else
    wpsim::write_text_file(out_path, csv.str());
  std::cerr << "sweep: " << rows.size() << " runs" << std::endl;
  return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"wpsim: trace-driven out-of-order core simulator with wrong-path execution"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic trace from a workload config");
  std::string gen_config, gen_out, gen_report;
  int64_t gen_seed = -1;
  gen->add_option("--config", gen_config, "workload config (key = value)")->required();
  gen->add_option("--out", gen_out, "output trace file")->required();
  gen->add_option("--seed", gen_seed, "override the workload seed");
  gen->add_option("--report", gen_report, "write the generator report JSON here");

  // validate
  auto* validate = app.add_subcommand("validate", "validate a trace file");
  std::string val_trace, val_format = "text";
  validate->add_option("--trace", val_trace, "trace file")->required();
  validate->add_option("--format", val_format, "text|json")->check(CLI::IsMember({"text", "json"}));

  // run
  auto* run = app.add_subcommand("run", "simulate one trace");
  std::string run_trace_path, run_config, run_mode, run_out, run_format = "json";
  run->add_option("--trace", run_trace_path, "trace file")->required();
  run->add_option("--config", run_config, "simulator config (section.key = value)");
  run->add_option("--mode", run_mode, "wp|cp (overrides the config)")->check(CLI::IsMember({"wp", "cp"}));
  run->add_option("--out", run_out, "write run stats here (stdout when omitted)");
  run->add_option("--format", run_format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  // compare
  auto* cmp = app.add_subcommand("compare", "derive WP-vs-CP metrics from two run stats files");
  std::string cmp_wp, cmp_cp, cmp_out, cmp_format = "json";
  cmp->add_option("wp_stats", cmp_wp, "WP-mode run stats JSON")->required();
  cmp->add_option("cp_stats", cmp_cp, "CP-mode run stats JSON")->required();
  cmp->add_option("--out", cmp_out, "write the report here (stdout when omitted)");
  cmp->add_option("--format", cmp_format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a cartesian product of traces/seeds x configs x modes");
  std::string sweep_workload, sweep_out;
  std::vector<std::string> sweep_traces, sweep_configs, sweep_modes;
  std::vector<uint64_t> sweep_seeds;
  unsigned sweep_jobs = 1;
  sweep->add_option("--workload", sweep_workload, "workload config; traces are generated per seed");
  sweep->add_option("--trace", sweep_traces, "pre-made trace file(s)");
  sweep->add_option("--config", sweep_configs, "simulator config file(s)")->required();
  sweep->add_option("--seeds", sweep_seeds, "seeds for --workload")->delimiter(',');
  sweep->add_option("--modes", sweep_modes, "subset of wp,cp (default both)")->delimiter(',');
  sweep->add_option("--jobs", sweep_jobs, "parallel runs")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "output CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_config, gen_out, gen_seed, gen_report);
    if (validate->parsed())
      return cmd_validate(val_trace, val_format == "json");
    if (run->parsed())
      return cmd_run(run_trace_path, run_config, run_mode, run_out, run_format);
    if (cmp->parsed())
      return cmd_compare(cmp_wp, cmp_cp, cmp_out, cmp_format);
    if (sweep->parsed())
      return cmd_sweep(sweep_workload, sweep_traces, sweep_configs, sweep_seeds, sweep_modes, sweep_jobs, sweep_out);
  } catch (const wpsim::SimError& e) {
    std::cerr << "simulation assertion: " << e.what() << std::endl;
    return kExitSimAssert;
  } catch (const wpsim::TraceError& e) {
    std::cerr << "trace error: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  }
  return kExitUsage;
}
