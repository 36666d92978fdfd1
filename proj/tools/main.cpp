#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vpfuzz/bench.hpp"
#include "vpfuzz/config.hpp"
#include "vpfuzz/coverage.hpp"
#include "vpfuzz/fuzzer.hpp"
#include "vpfuzz/guests.hpp"
#include "vpfuzz/harness.hpp"
#include "vpfuzz/util.hpp"

namespace {

using namespace vpfuzz;

VpConfig load_config(const std::string& path) {
  VpConfig cfg = load_config_file(path);
  // Relative image paths resolve against the config file's directory.
  if (!cfg.image_path.empty() &&
      std::filesystem::path(cfg.image_path).is_relative()) {
    cfg.image_path =
        (std::filesystem::path(path).parent_path() / cfg.image_path).string();
  }
  return cfg;
}

int cmd_run(const std::string& config_path, const std::string& input_path,
            bool trace_probe, bool dump_coverage) {
  VpConfig cfg = load_config(config_path);
  std::vector<uint8_t> input = read_file_bytes(input_path);

  EmbeddedVp vp(cfg);
  vp.set_trace_probe(trace_probe);
  RunResult r = vp.run_case(input);

  CoverageMap raw;
  raw.bytes = r.coverage;
  CoverageMap classified = classify_counts(raw);
  uint64_t digest = coverage_digest(classified);

  std::printf("exit: %s\n", exit_kind_to_string(r.exit).c_str());
  std::printf("instructions: %llu\n",
              static_cast<unsigned long long>(r.instructions));
  std::printf("probe_reads: %llu\n",
              static_cast<unsigned long long>(r.probe_reads));
  std::printf("exec_us: %llu\n", static_cast<unsigned long long>(r.exec_us));
  std::printf("coverage_digest: %s\n", hex64(digest).c_str());
  if (dump_coverage) {
    auto idx = nonzero_indices(raw);
    std::printf("coverage_nonzero: %zu\n", idx.size());
    for (uint32_t i : idx)
      std::printf("  map[%u] = %u\n", i, raw.bytes[i]);
  }

  switch (r.exit.tag) {
    case ExitKindTag::Ok: return kExitOk;
    case ExitKindTag::Crash: return kExitCrash;
    case ExitKindTag::Timeout:
    case ExitKindTag::InputExhausted: return kExitAbnormal;
  }
  return kExitAbnormal;
}

int cmd_fuzz(const std::string& config_path, const std::string& mode_name,
             uint64_t max_execs, double max_seconds, bool force,
             bool stop_on_crash, const std::string& out_dir_override) {
  CampaignOptions opts;
  opts.config = load_config(config_path);
  opts.mode = mode_name == "restart" ? ExecMode::Restart : ExecMode::Persistent;
  if (max_execs > 0) opts.max_execs = max_execs;
  if (max_seconds > 0) opts.max_seconds = max_seconds;
  opts.out_dir = out_dir_override.empty() ? opts.config.out_dir : out_dir_override;
  opts.force = force;
  opts.stop_on_first_crash = stop_on_crash;
  opts.quiet = false;
  if (opts.out_dir.empty())
    throw ConfigError("no out_dir configured (set [fuzz] out_dir or pass --out)");
  if (opts.config.tracked.empty())
    throw ConfigError("fuzzing requires at least one tracked range");

  std::signal(SIGINT, [](int) { g_interrupt_requested.store(true); });
  CampaignReport report = fuzz_campaign(opts);
  std::printf("%s", report.to_text().c_str());
  std::printf("elapsed: %.1f s\n", report.elapsed_seconds);
  if (report.aborted) {
    std::fprintf(stderr, "campaign aborted: %s\n", report.abort_reason.c_str());
    return 1;
  }
  return 0;
}

int cmd_bench(const std::string& config_path, uint64_t iterations,
              const std::string& mode_name, size_t corpus_size,
              const std::string& csv_path) {
  VpConfig cfg = load_config(config_path);
  BenchModeFilter filter = BenchModeFilter::Both;
  if (mode_name == "restart") filter = BenchModeFilter::RestartOnly;
  else if (mode_name == "persistent") filter = BenchModeFilter::PersistentOnly;

  BenchReport report = run_bench(cfg, iterations, filter, corpus_size);
  if (csv_path.empty()) {
    std::printf("%s\n", report.csv().c_str());
  } else {
    write_file_text(csv_path, report.csv());
    std::printf("csv written to %s\n", csv_path.c_str());
  }
  std::printf("%s", report.summary().c_str());
  return 0;
}

int cmd_guest_build(const std::string& name, const std::string& password,
                    int shift, const std::string& out_dir) {
  GuestBundle bundle = build_guest_by_name(name, password, shift);
  write_bundle(bundle, out_dir);
  std::printf("wrote %s/%s.{bin,sym,cfg} (%zu bytes, %zu symbols)\n",
              out_dir.c_str(), bundle.name.c_str(), bundle.binary.size(),
              bundle.symbols.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vpfuzz: coverage-guided fuzzing for a bus-accurate RV32I VP "
               "with MMIO interception"};
  app.require_subcommand(1);

  std::string config_path, input_path;
  bool trace_probe = false, dump_coverage = false;
  auto* run = app.add_subcommand("run", "execute one input and report the result");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("input", input_path, "input file")->required();
  run->add_flag("--trace-probe", trace_probe, "print one line per probe read");
  run->add_flag("--dump-coverage", dump_coverage, "dump nonzero coverage slots");

  std::string fuzz_config, fuzz_mode = "persistent", fuzz_out;
  uint64_t max_execs = 0;
  double max_seconds = 0;
  bool force = false;
  bool stop_on_crash = false;
  auto* fuzz = app.add_subcommand("fuzz", "run a fuzzing campaign");
  fuzz->add_option("config", fuzz_config, "config file")->required();
  fuzz->add_option("--mode", fuzz_mode, "restart|persistent")
      ->check(CLI::IsMember({"restart", "persistent"}));
  fuzz->add_option("--max-execs", max_execs, "stop after N executions");
  fuzz->add_option("--max-seconds", max_seconds, "stop after S seconds");
  fuzz->add_option("--out", fuzz_out, "output directory (overrides config)");
  fuzz->add_flag("--force", force, "overwrite an existing output directory");
  fuzz->add_flag("--stop-on-crash", stop_on_crash,
                 "end the campaign after the first unique crash");

  std::string bench_config, bench_mode = "both", bench_csv;
  uint64_t iterations = 50;
  size_t corpus_size = 1000;
  auto* bench = app.add_subcommand("bench", "measure stage timings and throughput");
  bench->add_option("config", bench_config, "config file")->required();
  bench->add_option("--iterations", iterations, "stage-timing iterations");
  bench->add_option("--mode", bench_mode, "restart|persistent|both")
      ->check(CLI::IsMember({"restart", "persistent", "both"}));
  bench->add_option("--corpus-size", corpus_size, "throughput corpus size");
  bench->add_option("--csv", bench_csv, "write the CSV here instead of stdout");

  auto* guest = app.add_subcommand("guest", "guest image tooling");
  guest->require_subcommand(1);
  std::string guest_name, guest_password = "hello", guest_out = ".";
  int guest_shift = 1;
  auto* gbuild = guest->add_subcommand("build", "emit <name>.bin/.sym/.cfg");
  gbuild->add_option("name", guest_name, "guest name")->required();
  gbuild->add_option("--password", guest_password, "password (password guests)");
  gbuild->add_option("--shift", guest_shift, "cipher shift 1..25");
  gbuild->add_option("-o,--out", guest_out, "output directory");

  auto* serve = app.add_subcommand(
      "vp-serve", "serve a VP over stdio frames (used internally)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, input_path, trace_probe, dump_coverage);
    if (fuzz->parsed())
      return cmd_fuzz(fuzz_config, fuzz_mode, max_execs, max_seconds, force,
                      stop_on_crash, fuzz_out);
    if (bench->parsed())
      return cmd_bench(bench_config, iterations, bench_mode, corpus_size,
                       bench_csv);
    if (guest->parsed())
      return cmd_guest_build(guest_name, guest_password, guest_shift, guest_out);
    if (serve->parsed()) return vpfuzz::run_vp_server(0, 1);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
