#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vpfuzz/config.hpp"
#include "vpfuzz/frame.hpp"
#include "vpfuzz/sim.hpp"

namespace vpfuzz {

enum class ExitKindTag : uint8_t {
  Ok = 0,
  Crash = 1,
  Timeout = 2,
  InputExhausted = 3,
};

enum class CrashReasonTag : uint8_t {
  None = 0,
  ReturnValueNonzero = 1,
  ErrorHandlerReached = 2,
  HardwareFault = 3,
};

struct ExitKind {
  ExitKindTag tag = ExitKindTag::Ok;
  CrashReasonTag reason = CrashReasonTag::None;
  // Return value for ReturnValueNonzero, FaultKind for HardwareFault.
  uint32_t value = 0;

  bool operator==(const ExitKind&) const = default;

  static ExitKind ok() { return {}; }
  static ExitKind crash(CrashReasonTag r, uint32_t v) {
    return {ExitKindTag::Crash, r, v};
  }
  static ExitKind timeout() { return {ExitKindTag::Timeout, CrashReasonTag::None, 0}; }
  static ExitKind exhausted() {
    return {ExitKindTag::InputExhausted, CrashReasonTag::None, 0};
  }
};

std::string exit_kind_to_string(const ExitKind& k);
const char* crash_reason_name(CrashReasonTag r);

struct RunResult {
  ExitKind exit;
  uint64_t instructions = 0;
  uint64_t probe_reads = 0;  // embedded mode only; not carried by RESULT frames
  uint64_t exec_us = 0;
  std::vector<uint8_t> coverage;  // raw map, kCoverageMapSize bytes
};

struct StageTimings {
  double startup_ms = 0;
  double config_ms = 0;
  double exec_ms = 0;
};

// Maps how a run stopped onto the configured crash conventions.
ExitKind classify_stop(const SimStop& stop, const CpuState& cpu,
                       const VpConfig& cfg);

class VpHandle {
 public:
  virtual ~VpHandle() = default;
  virtual RunResult run_case(std::span<const uint8_t> input) = 0;
  virtual void shutdown() {}
  virtual bool alive() const { return true; }

  StageTimings timings;
};

// In-process VP. Keeps a reset snapshot taken at the persistent entry (or
// the plain entry point) and restores it before every run, so each test
// case starts from identical state.
class EmbeddedVp : public VpHandle {
 public:
  explicit EmbeddedVp(const VpConfig& cfg);

  RunResult run_case(std::span<const uint8_t> input) override;

  Simulator& sim() { return *sim_; }
  const VpConfig& config() const { return cfg_; }
  void set_trace_probe(bool on);

 private:
  VpConfig cfg_;
  std::unique_ptr<Simulator> sim_;
  RunLimits limits_;
};

// Child-process VP talked to over length-prefixed frames on its stdio.
class ProcessVp : public VpHandle {
 public:
  ProcessVp(const VpConfig& cfg, const std::string& binary_path);
  ~ProcessVp() override;

  RunResult run_case(std::span<const uint8_t> input) override;
  void shutdown() override;
  bool alive() const override { return alive_; }

 private:
  void kill_child();
  bool read_frame(Frame& out, int timeout_ms);
  bool write_frame(const Frame& f);

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool alive_ = false;
  std::vector<uint8_t> rxbuf_;
  uint32_t run_timeout_ms_ = 2000;
};

// Resolves the VP child binary: $VPFUZZ_BIN, else the running executable.
std::string default_vp_binary();

enum class ExecMode : uint8_t { Restart, Persistent };
const char* exec_mode_name(ExecMode m);

// One test case per call. Restart mode spawns a fresh VP process per case;
// persistent mode reuses an embedded VP and respawns it only after a crash,
// since a crashed guest's memory is untrusted.
class CaseRunner {
 public:
  CaseRunner(VpConfig cfg, ExecMode mode, std::string vp_binary = "");

  RunResult run(std::span<const uint8_t> input);

  const std::vector<StageTimings>& spawn_log() const { return spawn_log_; }
  uint64_t spawn_count() const { return spawn_count_; }
  ExecMode mode() const { return mode_; }

 private:
  VpConfig cfg_;
  ExecMode mode_;
  std::string binary_;
  std::unique_ptr<EmbeddedVp> embedded_;
  std::vector<StageTimings> spawn_log_;
  uint64_t spawn_count_ = 0;
};

// Serves CONFIGURE/RUN/SHUTDOWN frames on the given file descriptors; the
// body of the `vp-serve` subcommand. Returns the process exit status.
int run_vp_server(int in_fd, int out_fd);

ResultPayload result_to_payload(const RunResult& r);
RunResult payload_to_result(const ResultPayload& p);

}  // namespace vpfuzz
