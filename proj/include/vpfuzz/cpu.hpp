#pragma once

#include <array>
#include <cstdint>

#include "vpfuzz/bus.hpp"

namespace vpfuzz {

namespace reg {
inline constexpr uint8_t ra = 1;
inline constexpr uint8_t sp = 2;
inline constexpr uint8_t a0 = 10;
inline constexpr uint8_t a1 = 11;
}  // namespace reg

enum class Op : uint8_t {
  Lui, Auipc, Jal, Jalr,
  Beq, Bne, Blt, Bge, Bltu, Bgeu,
  Lb, Lh, Lw, Lbu, Lhu,
  Sb, Sh, Sw,
  Addi, Slti, Sltiu, Xori, Ori, Andi, Slli, Srli, Srai,
  Add, Sub, Sll, Slt, Sltu, Xor, Srl, Sra, Or, And,
  Ecall, Ebreak,
  Illegal,
};

// Decoded structural form. Unknown encodings come back as Op::Illegal; an
// illegal encoding is a value, not an error.
struct Instruction {
  Op op = Op::Illegal;
  uint8_t rd = 0;
  uint8_t rs1 = 0;
  uint8_t rs2 = 0;
  int32_t imm = 0;
};

Instruction decode(uint32_t word);

enum class CpuStatusKind : uint8_t { Running, Exited, Faulted, BreakpointHit };

struct CpuStatus {
  CpuStatusKind kind = CpuStatusKind::Running;
  uint8_t exit_code = 0;       // Exited
  FaultKind fault = FaultKind::BusError;  // Faulted
  uint32_t breakpoint_pc = 0;  // BreakpointHit
};

// x0 stays zero because the write path discards it; pc is 4-byte aligned
// whenever status is Running.
struct CpuState {
  std::array<uint32_t, 32> regs{};
  uint32_t pc = 0;
  uint64_t instr_count = 0;
  CpuStatus status;

  bool running() const { return status.kind == CpuStatusKind::Running; }
  void write_reg(uint8_t rd, uint32_t v) {
    if (rd != 0) regs[rd] = v;
  }
  void fault(FaultKind k) {
    status.kind = CpuStatusKind::Faulted;
    status.fault = k;
  }
};

// What one step did, beyond mutating the CPU: control transfers feed edge
// coverage, input_exhausted ends the run under the EndRun policy.
struct StepEvent {
  bool control_transfer = false;
  uint32_t transfer_target = 0;
  bool input_exhausted = false;
};

// Fetch-decode-execute exactly one instruction. instr_count increments for
// every call that starts in Running, faulting or not.
StepEvent step(CpuState& cpu, BusRouter& bus);

}  // namespace vpfuzz
