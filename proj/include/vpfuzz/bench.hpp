#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vpfuzz/harness.hpp"

namespace vpfuzz {

struct BenchRow {
  uint64_t iteration = 0;
  ExecMode mode = ExecMode::Restart;
  double startup_ms = 0;
  double config_ms = 0;
  double exec_ms = 0;
};

struct ThroughputResult {
  uint64_t execs = 0;
  double seconds = 0;
  double execs_per_sec = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::optional<ThroughputResult> restart_throughput;
  std::optional<ThroughputResult> persistent_throughput;

  double mean_startup_ms(ExecMode mode) const;
  double mean_config_ms(ExecMode mode) const;
  double mean_exec_ms(ExecMode mode) const;
  // persistent execs/sec over restart execs/sec; 0 when either is missing.
  double speedup() const;

  std::string csv() const;  // schema: iteration,mode,startup_ms,config_ms,exec_ms
  std::string summary() const;
};

enum class BenchModeFilter { Both, RestartOnly, PersistentOnly };

// Deterministic input corpus used for the throughput comparison; derived
// from the config's rng_seed.
std::vector<std::vector<uint8_t>> bench_corpus(uint64_t rng_seed, size_t n);

// Stage timings over `iterations` runs per mode, then a throughput phase
// over a fixed corpus run once through each selected mode.
BenchReport run_bench(const VpConfig& cfg, uint64_t iterations,
                      BenchModeFilter filter, size_t corpus_size,
                      const std::string& vp_binary = "");

}  // namespace vpfuzz
