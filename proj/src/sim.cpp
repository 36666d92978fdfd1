#include "vpfuzz/sim.hpp"

#include <algorithm>

namespace vpfuzz {

namespace {
// Wall-clock checks are amortized; the budget stays exact.
constexpr uint64_t kWallCheckInterval = 1u << 16;
}  // namespace

SimRunResult Simulator::run_until(const RunLimits& limits) {
  SimRunResult result;
  cov_.reset();
  const uint64_t start_count = cpu_.instr_count;

  auto finish = [&](SimStop stop) {
    result.stop = stop;
    result.instructions = cpu_.instr_count - start_count;
    return result;
  };

  if (!cpu_.running()) return finish({StopKind::Timeout});
  cov_.record_edge(cpu_.pc);  // entry point of this run

  uint64_t until_wall_check = kWallCheckInterval;
  for (;;) {
    if (std::find(limits.breakpoints.begin(), limits.breakpoints.end(),
                  cpu_.pc) != limits.breakpoints.end())
      return finish({StopKind::ConfigBreakpoint, 0, FaultKind::BusError, cpu_.pc});

    StepEvent ev = step(cpu_, bus_);
    if (ev.control_transfer) cov_.record_edge(ev.transfer_target);
    if (ev.input_exhausted) return finish({StopKind::InputExhausted});

    switch (cpu_.status.kind) {
      case CpuStatusKind::Running:
        break;
      case CpuStatusKind::Exited:
        return finish({StopKind::Exited, cpu_.status.exit_code});
      case CpuStatusKind::Faulted:
        return finish({StopKind::Fault, 0, cpu_.status.fault});
      case CpuStatusKind::BreakpointHit:
        return finish({StopKind::GuestBreak, 0, FaultKind::BusError,
                       cpu_.status.breakpoint_pc});
    }

    if (cpu_.instr_count - start_count >= limits.max_instructions)
      return finish({StopKind::Timeout});

    if (limits.wall_deadline && --until_wall_check == 0) {
      until_wall_check = kWallCheckInterval;
      if (std::chrono::steady_clock::now() >= *limits.wall_deadline)
        return finish({StopKind::WallTimeout});
    }
  }
}

}  // namespace vpfuzz
