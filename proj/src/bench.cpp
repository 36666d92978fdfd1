#include "vpfuzz/bench.hpp"

#include <cstdio>
#include <sstream>

#include "vpfuzz/fuzzer.hpp"
#include "vpfuzz/util.hpp"

namespace vpfuzz {

namespace {

double mean_of(const std::vector<BenchRow>& rows, ExecMode mode,
               double BenchRow::*field) {
  double sum = 0;
  size_t n = 0;
  for (const auto& r : rows)
    if (r.mode == mode) {
      sum += r.*field;
      n++;
    }
  return n ? sum / static_cast<double>(n) : 0;
}

}  // namespace

double BenchReport::mean_startup_ms(ExecMode mode) const {
  return mean_of(rows, mode, &BenchRow::startup_ms);
}
double BenchReport::mean_config_ms(ExecMode mode) const {
  return mean_of(rows, mode, &BenchRow::config_ms);
}
double BenchReport::mean_exec_ms(ExecMode mode) const {
  return mean_of(rows, mode, &BenchRow::exec_ms);
}

double BenchReport::speedup() const {
  if (!restart_throughput || !persistent_throughput) return 0;
  if (restart_throughput->execs_per_sec <= 0) return 0;
  return persistent_throughput->execs_per_sec /
         restart_throughput->execs_per_sec;
}

std::string BenchReport::csv() const {
  std::ostringstream s;
  s << "iteration,mode,startup_ms,config_ms,exec_ms\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%s,%.3f,%.3f,%.3f\n",
                  static_cast<unsigned long long>(r.iteration),
                  exec_mode_name(r.mode), r.startup_ms, r.config_ms, r.exec_ms);
    s << buf;
  }
  return s.str();
}

std::string BenchReport::summary() const {
  std::ostringstream s;
  char buf[256];
  for (ExecMode mode : {ExecMode::Restart, ExecMode::Persistent}) {
    bool any = false;
    for (const auto& r : rows) any |= r.mode == mode;
    if (!any) continue;
    std::snprintf(buf, sizeof(buf),
                  "%-10s stages: startup %.3f ms, config %.3f ms, exec %.3f ms\n",
                  exec_mode_name(mode), mean_startup_ms(mode),
                  mean_config_ms(mode), mean_exec_ms(mode));
    s << buf;
  }
  auto tp_line = [&](const char* name, const ThroughputResult& t) {
    std::snprintf(buf, sizeof(buf),
                  "%-10s throughput: %llu execs in %.2f s = %.1f execs/sec\n",
                  name, static_cast<unsigned long long>(t.execs), t.seconds,
                  t.execs_per_sec);
    s << buf;
  };
  if (restart_throughput) tp_line("restart", *restart_throughput);
  if (persistent_throughput) tp_line("persistent", *persistent_throughput);
  if (restart_throughput && persistent_throughput) {
    std::snprintf(buf, sizeof(buf), "persistent/restart speedup: %.1fx\n",
                  speedup());
    s << buf;
  }
  return s.str();
}

std::vector<std::vector<uint8_t>> bench_corpus(uint64_t rng_seed, size_t n) {
  Rng rng(rng_seed ^ 0x62656e63686d6b00ull);
  std::vector<std::vector<uint8_t>> corpus(n);
  for (auto& input : corpus) {
    size_t len = rng.below(9);
    input.resize(len);
    for (auto& b : input) b = static_cast<uint8_t>(rng.below(256));
    if (rng.below(2)) input.push_back('\n');
  }
  return corpus;
}

BenchReport run_bench(const VpConfig& cfg, uint64_t iterations,
                      BenchModeFilter filter, size_t corpus_size,
                      const std::string& vp_binary) {
  BenchReport report;
  auto corpus = bench_corpus(cfg.rng_seed, std::max<size_t>(corpus_size, 1));
  const bool do_restart = filter != BenchModeFilter::PersistentOnly;
  const bool do_persistent = filter != BenchModeFilter::RestartOnly;
  const std::string bin = vp_binary.empty() ? default_vp_binary() : vp_binary;

  if (do_restart) {
    for (uint64_t i = 0; i < iterations; i++) {
      ProcessVp vp(cfg, bin);
      RunResult r = vp.run_case(corpus[i % corpus.size()]);
      vp.shutdown();
      report.rows.push_back({i, ExecMode::Restart, vp.timings.startup_ms,
                             vp.timings.config_ms,
                             static_cast<double>(r.exec_us) / 1000.0});
    }
  }
  if (do_persistent) {
    EmbeddedVp vp(cfg);
    for (uint64_t i = 0; i < iterations; i++) {
      RunResult r = vp.run_case(corpus[i % corpus.size()]);
      // Spawn costs are paid once; they appear on the first row only.
      report.rows.push_back({i, ExecMode::Persistent,
                             i == 0 ? vp.timings.startup_ms : 0.0,
                             i == 0 ? vp.timings.config_ms : 0.0,
                             static_cast<double>(r.exec_us) / 1000.0});
    }
  }

  if (do_restart) {
    CaseRunner runner(cfg, ExecMode::Restart, bin);
    double t0 = now_ms();
    for (const auto& input : corpus) runner.run(input);
    double secs = (now_ms() - t0) / 1000.0;
    report.restart_throughput = {corpus.size(), secs,
                                 secs > 0 ? corpus.size() / secs : 0};
  }
  if (do_persistent) {
    CaseRunner runner(cfg, ExecMode::Persistent, bin);
    double t0 = now_ms();
    for (const auto& input : corpus) runner.run(input);
    double secs = (now_ms() - t0) / 1000.0;
    report.persistent_throughput = {corpus.size(), secs,
                                    secs > 0 ? corpus.size() / secs : 0};
  }
  return report;
}

}  // namespace vpfuzz
