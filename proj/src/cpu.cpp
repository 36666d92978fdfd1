#include "vpfuzz/cpu.hpp"

namespace vpfuzz {

namespace {

int32_t sign_extend(uint32_t x, int bits) {
  uint32_t m = 1u << (bits - 1);
  return static_cast<int32_t>((x ^ m) - m);
}

int32_t imm_i(uint32_t w) { return sign_extend(w >> 20, 12); }
int32_t imm_s(uint32_t w) {
  return sign_extend(((w >> 25) << 5) | ((w >> 7) & 0x1f), 12);
}
int32_t imm_b(uint32_t w) {
  return sign_extend(((w >> 31) << 12) | (((w >> 7) & 1) << 11) |
                         (((w >> 25) & 0x3f) << 5) | (((w >> 8) & 0xf) << 1),
                     13);
}
int32_t imm_u(uint32_t w) { return static_cast<int32_t>(w & 0xfffff000u); }
int32_t imm_j(uint32_t w) {
  return sign_extend(((w >> 31) << 20) | (((w >> 12) & 0xff) << 12) |
                         (((w >> 20) & 1) << 11) | (((w >> 21) & 0x3ff) << 1),
                     21);
}

}  // namespace

Instruction decode(uint32_t word) {
  Instruction ins;
  ins.rd = (word >> 7) & 0x1f;
  ins.rs1 = (word >> 15) & 0x1f;
  ins.rs2 = (word >> 20) & 0x1f;
  const uint32_t opcode = word & 0x7f;
  const uint32_t funct3 = (word >> 12) & 0x7;
  const uint32_t funct7 = word >> 25;

  switch (opcode) {
    case 0x37:
      ins.op = Op::Lui;
      ins.imm = imm_u(word);
      break;
    case 0x17:
      ins.op = Op::Auipc;
      ins.imm = imm_u(word);
      break;
    case 0x6f:
      ins.op = Op::Jal;
      ins.imm = imm_j(word);
      break;
    case 0x67:
      if (funct3 != 0) return ins;
      ins.op = Op::Jalr;
      ins.imm = imm_i(word);
      break;
    case 0x63: {
      static constexpr Op branch_ops[8] = {Op::Beq, Op::Bne, Op::Illegal,
                                           Op::Illegal, Op::Blt, Op::Bge,
                                           Op::Bltu, Op::Bgeu};
      if (branch_ops[funct3] == Op::Illegal) return ins;
      ins.op = branch_ops[funct3];
      ins.imm = imm_b(word);
      break;
    }
    case 0x03: {
      static constexpr Op load_ops[8] = {Op::Lb, Op::Lh, Op::Lw, Op::Illegal,
                                         Op::Lbu, Op::Lhu, Op::Illegal,
                                         Op::Illegal};
      if (load_ops[funct3] == Op::Illegal) return ins;
      ins.op = load_ops[funct3];
      ins.imm = imm_i(word);
      break;
    }
    case 0x23: {
      static constexpr Op store_ops[8] = {Op::Sb, Op::Sh, Op::Sw, Op::Illegal,
                                          Op::Illegal, Op::Illegal, Op::Illegal,
                                          Op::Illegal};
      if (store_ops[funct3] == Op::Illegal) return ins;
      ins.op = store_ops[funct3];
      ins.imm = imm_s(word);
      break;
    }
    case 0x13:
      switch (funct3) {
        case 0: ins.op = Op::Addi; ins.imm = imm_i(word); break;
        case 2: ins.op = Op::Slti; ins.imm = imm_i(word); break;
        case 3: ins.op = Op::Sltiu; ins.imm = imm_i(word); break;
        case 4: ins.op = Op::Xori; ins.imm = imm_i(word); break;
        case 6: ins.op = Op::Ori; ins.imm = imm_i(word); break;
        case 7: ins.op = Op::Andi; ins.imm = imm_i(word); break;
        case 1:
          if (funct7 != 0) return ins;
          ins.op = Op::Slli;
          ins.imm = ins.rs2;
          break;
        case 5:
          if (funct7 == 0)
            ins.op = Op::Srli;
          else if (funct7 == 0x20)
            ins.op = Op::Srai;
          else
            return ins;
          ins.imm = ins.rs2;
          break;
      }
      break;
    case 0x33: {
      if (funct7 == 0) {
        static constexpr Op ops[8] = {Op::Add, Op::Sll, Op::Slt, Op::Sltu,
                                      Op::Xor, Op::Srl, Op::Or, Op::And};
        ins.op = ops[funct3];
      } else if (funct7 == 0x20) {
        if (funct3 == 0)
          ins.op = Op::Sub;
        else if (funct3 == 5)
          ins.op = Op::Sra;
        else
          return ins;
      } else {
        return ins;
      }
      break;
    }
    case 0x73:
      if (word == 0x00000073)
        ins.op = Op::Ecall;
      else if (word == 0x00100073)
        ins.op = Op::Ebreak;
      break;
    default:
      break;
  }
  return ins;
}

namespace {

// Loads/stores require natural alignment; the misaligned case never reaches
// the bus, so tracked-range reads consume nothing.
bool aligned(uint32_t addr, uint32_t size) { return addr % size == 0; }

}  // namespace

StepEvent step(CpuState& cpu, BusRouter& bus) {
  StepEvent ev;
  if (!cpu.running()) return ev;
  cpu.instr_count++;

  const uint32_t pc = cpu.pc;
  if ((pc & 3u) != 0) {
    cpu.fault(FaultKind::MisalignedAccess);
    return ev;
  }
  // Fetch goes straight to memory; the probe only sees data reads.
  GuestMemory& mem = bus.memory();
  switch (mem.classify(pc, 4)) {
    case GuestMemory::Access::Ok: break;
    case GuestMemory::Access::Guard: cpu.fault(FaultKind::StackOverflowGuard); return ev;
    case GuestMemory::Access::Out: cpu.fault(FaultKind::BusError); return ev;
  }
  const uint32_t word = mem.read(pc, 4);
  const Instruction ins = decode(word);

  const uint32_t rs1 = cpu.regs[ins.rs1];
  const uint32_t rs2 = cpu.regs[ins.rs2];
  const uint32_t immu = static_cast<uint32_t>(ins.imm);
  uint32_t next_pc = pc + 4;

  auto jump = [&](uint32_t target) {
    if ((target & 3u) != 0) {
      cpu.fault(FaultKind::MisalignedAccess);
      return false;
    }
    next_pc = target;
    ev.control_transfer = true;
    ev.transfer_target = target;
    return true;
  };
  auto mem_op = [&](uint32_t size, BusDir dir, uint32_t data,
                    uint32_t& out) -> bool {
    uint32_t addr = rs1 + immu;
    if (!aligned(addr, size)) {
      cpu.fault(FaultKind::MisalignedAccess);
      return false;
    }
    BusResponse r = bus.route({addr, size, dir, data, pc});
    switch (r.status) {
      case BusStatus::Ok:
        out = r.data;
        return true;
      case BusStatus::Fault:
        cpu.fault(r.fault);
        return false;
      case BusStatus::InputExhausted:
        ev.input_exhausted = true;
        return false;
    }
    return false;
  };

  uint32_t v = 0;
  switch (ins.op) {
    case Op::Lui: cpu.write_reg(ins.rd, immu); break;
    case Op::Auipc: cpu.write_reg(ins.rd, pc + immu); break;
    case Op::Jal:
      if (jump(pc + immu)) cpu.write_reg(ins.rd, pc + 4);
      break;
    case Op::Jalr:
      if (jump((rs1 + immu) & ~1u)) cpu.write_reg(ins.rd, pc + 4);
      break;
    case Op::Beq: if (rs1 == rs2) jump(pc + immu); break;
    case Op::Bne: if (rs1 != rs2) jump(pc + immu); break;
    case Op::Blt:
      if (static_cast<int32_t>(rs1) < static_cast<int32_t>(rs2)) jump(pc + immu);
      break;
    case Op::Bge:
      if (static_cast<int32_t>(rs1) >= static_cast<int32_t>(rs2)) jump(pc + immu);
      break;
    case Op::Bltu: if (rs1 < rs2) jump(pc + immu); break;
    case Op::Bgeu: if (rs1 >= rs2) jump(pc + immu); break;
    case Op::Lb:
      if (mem_op(1, BusDir::Read, 0, v))
        cpu.write_reg(ins.rd, static_cast<uint32_t>(sign_extend(v, 8)));
      break;
    case Op::Lh:
      if (mem_op(2, BusDir::Read, 0, v))
        cpu.write_reg(ins.rd, static_cast<uint32_t>(sign_extend(v, 16)));
      break;
    case Op::Lw:
      if (mem_op(4, BusDir::Read, 0, v)) cpu.write_reg(ins.rd, v);
      break;
    case Op::Lbu:
      if (mem_op(1, BusDir::Read, 0, v)) cpu.write_reg(ins.rd, v);
      break;
    case Op::Lhu:
      if (mem_op(2, BusDir::Read, 0, v)) cpu.write_reg(ins.rd, v);
      break;
    case Op::Sb: mem_op(1, BusDir::Write, rs2 & 0xff, v); break;
    case Op::Sh: mem_op(2, BusDir::Write, rs2 & 0xffff, v); break;
    case Op::Sw: mem_op(4, BusDir::Write, rs2, v); break;
    case Op::Addi: cpu.write_reg(ins.rd, rs1 + immu); break;
    case Op::Slti:
      cpu.write_reg(ins.rd, static_cast<int32_t>(rs1) < ins.imm ? 1 : 0);
      break;
    case Op::Sltiu: cpu.write_reg(ins.rd, rs1 < immu ? 1 : 0); break;
    case Op::Xori: cpu.write_reg(ins.rd, rs1 ^ immu); break;
    case Op::Ori: cpu.write_reg(ins.rd, rs1 | immu); break;
    case Op::Andi: cpu.write_reg(ins.rd, rs1 & immu); break;
    case Op::Slli: cpu.write_reg(ins.rd, rs1 << (immu & 31)); break;
    case Op::Srli: cpu.write_reg(ins.rd, rs1 >> (immu & 31)); break;
    case Op::Srai:
      cpu.write_reg(ins.rd,
                    static_cast<uint32_t>(static_cast<int32_t>(rs1) >>
                                          (immu & 31)));
      break;
    case Op::Add: cpu.write_reg(ins.rd, rs1 + rs2); break;
    case Op::Sub: cpu.write_reg(ins.rd, rs1 - rs2); break;
    case Op::Sll: cpu.write_reg(ins.rd, rs1 << (rs2 & 31)); break;
    case Op::Slt:
      cpu.write_reg(ins.rd,
                    static_cast<int32_t>(rs1) < static_cast<int32_t>(rs2) ? 1 : 0);
      break;
    case Op::Sltu: cpu.write_reg(ins.rd, rs1 < rs2 ? 1 : 0); break;
    case Op::Xor: cpu.write_reg(ins.rd, rs1 ^ rs2); break;
    case Op::Srl: cpu.write_reg(ins.rd, rs1 >> (rs2 & 31)); break;
    case Op::Sra:
      cpu.write_reg(ins.rd,
                    static_cast<uint32_t>(static_cast<int32_t>(rs1) >>
                                          (rs2 & 31)));
      break;
    case Op::Or: cpu.write_reg(ins.rd, rs1 | rs2); break;
    case Op::And: cpu.write_reg(ins.rd, rs1 & rs2); break;
    case Op::Ecall:
      cpu.status.kind = CpuStatusKind::Exited;
      cpu.status.exit_code = static_cast<uint8_t>(cpu.regs[reg::a0]);
      return ev;
    case Op::Ebreak:
      cpu.status.kind = CpuStatusKind::BreakpointHit;
      cpu.status.breakpoint_pc = pc;
      return ev;
    case Op::Illegal:
      cpu.fault(FaultKind::IllegalInstruction);
      return ev;
  }
  if (cpu.running() && !ev.input_exhausted) cpu.pc = next_pc;
  return ev;
}

}  // namespace vpfuzz
