#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vpfuzz/coverage.hpp"
#include "vpfuzz/harness.hpp"

namespace vpfuzz {

inline constexpr size_t kMaxInputLen = 4096;

// Deterministic RNG: all campaign randomness flows through here, and bound
// draws avoid std::uniform_int_distribution so two runs of the same binary
// and seed replay identically.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  uint64_t below(uint64_t n) {
    if (n <= 1) return 0;
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  bool percent(unsigned p) { return below(100) < p; }

 private:
  std::mt19937_64 gen_;
};

enum class MutOp : uint8_t {
  BitFlip = 0,
  ByteRandom,
  ByteInteresting,
  ByteDelete,
  ByteInsert,
  ChunkDup,
  ChunkSplice,
  kCount,
};

using MutationHistogram = std::array<uint64_t, static_cast<size_t>(MutOp::kCount)>;

// 1..64 stacked operations; output length stays within [0, kMaxInputLen].
// corpus provides donor inputs for the splice-lite operation.
std::vector<uint8_t> mutate_havoc(std::span<const uint8_t> input, Rng& rng,
                                  const std::vector<std::vector<uint8_t>>& corpus,
                                  MutationHistogram* histogram = nullptr);

struct QueueEntry {
  std::vector<uint8_t> input;
  uint64_t coverage_digest = 0;  // digest of the classified map
  uint64_t exec_us = 0;
  uint64_t instructions = 0;     // deterministic cost proxy for scheduling
  uint64_t found_at_exec = 0;
  uint64_t times_fuzzed = 0;     // executions spent mutating this entry
  bool favored = false;
  std::vector<uint32_t> cov_indices;  // nonzero classified map indices
};

struct CrashRecord {
  std::vector<uint8_t> input;
  ExitKind exit;
  uint64_t coverage_digest = 0;
  uint64_t found_at_exec = 0;
};

// Scheduling energy. Scheduling must be reproducible, so recency is counted
// in executions and cost in instructions rather than wall time.
inline constexpr uint64_t kEnergyBase = 100;
inline constexpr uint64_t kRecentWindowExecs = 60'000;

uint64_t entry_energy(const QueueEntry& e, uint64_t now_exec,
                      uint64_t median_instructions);

// Favored entries win with probability 0.8; otherwise the pick is
// energy-weighted over the rest.
size_t schedule_next(const std::vector<QueueEntry>& queue, Rng& rng,
                     uint64_t now_exec, uint64_t median_instructions);

// Re-derives the favored flags: per covered map index, the smallest input
// covering it (ties to the earliest entry) wins; winners are favored.
void recompute_favored(std::vector<QueueEntry>& queue);

struct FuzzStats {
  uint64_t total_execs = 0;
  double execs_per_sec = 0;  // rolling 10 s window
  size_t queue_len = 0;
  size_t crashes_unique = 0;
  uint64_t last_new_path_exec = 0;
  ExecMode mode = ExecMode::Persistent;
};

struct CampaignOptions {
  VpConfig config;
  ExecMode mode = ExecMode::Persistent;
  std::optional<uint64_t> max_execs;
  std::optional<double> max_seconds;
  std::string out_dir;  // empty: keep everything in memory
  bool force = false;
  std::string vp_binary;
  std::vector<std::vector<uint8_t>> seeds;  // default: one empty seed
  bool quiet = true;
  bool stop_on_first_crash = false;
};

struct CampaignReport {
  ExecMode mode = ExecMode::Persistent;
  uint64_t rng_seed = 0;
  uint64_t total_execs = 0;
  uint64_t seed_execs = 0;  // executions not attributed to a queue entry
  uint64_t total_crash_events = 0;
  uint64_t last_new_path_exec = 0;
  size_t coverage_bytes = 0;  // nonzero bytes of the global classified map
  std::vector<QueueEntry> queue;
  std::vector<CrashRecord> crashes;  // deduplicated
  bool aborted = false;
  std::string abort_reason;
  double elapsed_seconds = 0;

  // Deterministic rendering: no wall-clock content.
  std::string to_text() const;
};

// Cooperative interrupt flag; the CLI points its SIGINT handler here.
extern std::atomic<bool> g_interrupt_requested;

CampaignReport fuzz_campaign(const CampaignOptions& opts);

}  // namespace vpfuzz
