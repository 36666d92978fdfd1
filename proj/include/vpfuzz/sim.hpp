#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vpfuzz/bus.hpp"
#include "vpfuzz/coverage.hpp"
#include "vpfuzz/cpu.hpp"
#include "vpfuzz/mem.hpp"
#include "vpfuzz/probe.hpp"

namespace vpfuzz {

inline constexpr uint64_t kDefaultMaxInstructions = 10'000'000;

struct RunLimits {
  uint64_t max_instructions = kDefaultMaxInstructions;
  std::vector<uint32_t> breakpoints;
  // Wall-clock backstop; the instruction budget is the deterministic limit.
  std::optional<std::chrono::steady_clock::time_point> wall_deadline;
};

enum class StopKind : uint8_t {
  Exited,           // guest exit, code attached
  Fault,            // hardware fault, kind attached
  ConfigBreakpoint, // configured breakpoint reached, not executed
  GuestBreak,       // guest executed a break instruction
  Timeout,          // instruction budget exceeded
  WallTimeout,      // wall-clock backstop fired
  InputExhausted,   // probe ran out of test-case bytes (EndRun policy)
};

struct SimStop {
  StopKind kind = StopKind::Timeout;
  uint8_t exit_code = 0;
  FaultKind fault = FaultKind::BusError;
  uint32_t addr = 0;  // breakpoint address
};

struct SimRunResult {
  SimStop stop;
  uint64_t instructions = 0;
};

struct Snapshot {
  CpuState cpu;
  std::vector<uint8_t> memory;
  uint32_t taken_at_pc = 0;
};

// One execution context: core, memory, probe and coverage map. Owned by a
// single thread; movable, never shared.
class Simulator {
 public:
  Simulator(uint32_t ram_base = kDefaultRamBase,
            uint32_t ram_size = kDefaultRamSize, ProbeConfig probe_cfg = {})
      : mem_(ram_base, ram_size),
        probe_(std::move(probe_cfg)),
        bus_(mem_, &probe_) {}

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void load_image(std::span<const uint8_t> image, uint32_t load_addr) {
    vpfuzz::load_image(mem_, image, load_addr);
  }

  void reset_cpu(uint32_t entry_pc, uint32_t stack_top) {
    cpu_ = CpuState{};
    cpu_.pc = entry_pc;
    cpu_.regs[reg::sp] = stack_top;
  }

  // Runs until the core leaves Running, a configured breakpoint address is
  // reached (before executing it), the instruction budget is exceeded, or
  // the probe ends the run. Resets the coverage map at entry.
  SimRunResult run_until(const RunLimits& limits);

  Snapshot snapshot() const {
    return {cpu_, mem_.snapshot_bytes(), cpu_.pc};
  }
  void restore(const Snapshot& s) {
    cpu_ = s.cpu;
    mem_.restore_bytes(s.memory);
  }

  // Reset-point restore: remembers the current state and later puts it back
  // by copying only the pages written since. Used by the persistent loop,
  // where a run touches a handful of pages out of the whole RAM.
  void mark_reset_point() {
    reset_point_ = snapshot();
    mem_.clear_dirty();
  }
  void restore_reset_point() {
    cpu_ = reset_point_.cpu;
    mem_.restore_dirty_from(reset_point_.memory);
  }
  const Snapshot& reset_point() const { return reset_point_; }

  CpuState& cpu() { return cpu_; }
  const CpuState& cpu() const { return cpu_; }
  GuestMemory& memory() { return mem_; }
  ProbeState& probe() { return probe_; }
  BusRouter& bus() { return bus_; }
  CoverageMap& coverage() { return cov_; }
  const CoverageMap& coverage() const { return cov_; }

 private:
  CpuState cpu_;
  GuestMemory mem_;
  ProbeState probe_;
  BusRouter bus_;
  CoverageMap cov_;
  Snapshot reset_point_;
};

}  // namespace vpfuzz
