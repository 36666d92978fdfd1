// Differential corpus: small programs covering arithmetic, branches,
// loads/stores and call/return. Each ends with ecall so both interpreters
// stop at a defined point. Shared by the unit suite and the acceptance
// suite.

#pragma once

#include <string>
#include <vector>

namespace diff_corpus {

inline std::vector<std::pair<std::string, std::string>> programs() {
  return {
      {"addi_chain",
       "entry:\n"
       "  addi x5, x0, 7\n"
       "  addi x6, x5, -3\n"
       "  addi x7, x6, 2047\n"
       "  addi x8, x7, -2048\n"
       "  ecall\n"},
      {"add_sub",
       "entry:\n"
       "  li x5, 1000\n"
       "  li x6, 234\n"
       "  add x7, x5, x6\n"
       "  sub x8, x5, x6\n"
       "  sub x9, x6, x5\n"
       "  add x10, x9, x9\n"
       "  ecall\n"},
      {"logic_imm",
       "entry:\n"
       "  li x5, 0x5a5\n"
       "  xori x6, x5, 0x2f\n"
       "  ori x7, x5, 0x70\n"
       "  andi x8, x5, 0xff\n"
       "  xori x9, x5, -1\n"
       "  ecall\n"},
      {"logic_reg",
       "entry:\n"
       "  li x5, 0x5a5\n"
       "  li x6, 0x3c3\n"
       "  and x7, x5, x6\n"
       "  or x8, x5, x6\n"
       "  xor x9, x5, x6\n"
       "  ecall\n"},
      {"slt_signed_unsigned",
       "entry:\n"
       "  li x5, -1\n"
       "  li x6, 1\n"
       "  slt x7, x5, x6\n"
       "  sltu x8, x5, x6\n"
       "  slti x9, x5, 0\n"
       "  sltiu x10, x5, -1\n"
       "  slti x11, x6, -5\n"
       "  ecall\n"},
      {"shift_imm",
       "entry:\n"
       "  li x5, -16\n"
       "  slli x6, x5, 4\n"
       "  srli x7, x5, 4\n"
       "  srai x8, x5, 4\n"
       "  srli x9, x5, 31\n"
       "  srai x10, x5, 31\n"
       "  slli x11, x5, 31\n"
       "  ecall\n"},
      {"shift_reg",
       "entry:\n"
       "  li x5, 0x12345678\n"
       "  li x6, 8\n"
       "  sll x7, x5, x6\n"
       "  srl x8, x5, x6\n"
       "  li x9, -8\n"
       "  sra x10, x9, x6\n"
       "  ecall\n"},
      {"lui_addi",
       "entry:\n"
       "  lui x5, 0x12345\n"
       "  addi x5, x5, 0x678\n"
       "  lui x6, 0xfffff\n"
       "  addi x6, x6, -1\n"
       "  ecall\n"},
      {"auipc_delta",
       "entry:\n"
       "  auipc x5, 0\n"
       "  auipc x6, 1\n"
       "  sub x7, x6, x5\n"
       "  ecall\n"},
      {"byte_signs",
       "entry:\n"
       "  li x5, 0x2800\n"
       "  li x6, 0x8f\n"
       "  sb x6, 0(x5)\n"
       "  lb x7, 0(x5)\n"
       "  lbu x8, 0(x5)\n"
       "  sb x6, 3(x5)\n"
       "  lb x9, 3(x5)\n"
       "  ecall\n"},
      {"half_signs",
       "entry:\n"
       "  li x5, 0x2800\n"
       "  li x6, 0x8abc\n"
       "  sh x6, 0(x5)\n"
       "  lh x7, 0(x5)\n"
       "  lhu x8, 0(x5)\n"
       "  ecall\n"},
      {"word_roundtrip",
       "entry:\n"
       "  li x5, 0x2800\n"
       "  li x6, 0xdeadbeef\n"
       "  sw x6, 0(x5)\n"
       "  lw x7, 0(x5)\n"
       "  sw x7, 4(x5)\n"
       "  lw x8, 4(x5)\n"
       "  ecall\n"},
      {"beq_paths",
       "entry:\n"
       "  li x5, 3\n"
       "  li x6, 3\n"
       "  li x7, 0\n"
       "  beq x5, x6, taken\n"
       "  addi x7, x7, 100\n"
       "taken:\n"
       "  addi x7, x7, 1\n"
       "  bne x5, x6, nottaken\n"
       "  addi x7, x7, 10\n"
       "nottaken:\n"
       "  ecall\n"},
      {"countdown_loop",
       "entry:\n"
       "  li x5, 5\n"
       "  li x6, 0\n"
       "loop:\n"
       "  add x6, x6, x5\n"
       "  addi x5, x5, -1\n"
       "  bnez x5, loop\n"
       "  ecall\n"},
      {"blt_bge_negative",
       "entry:\n"
       "  li x5, -10\n"
       "  li x6, 10\n"
       "  li x7, 0\n"
       "  blt x5, x6, a1\n"
       "  addi x7, x7, 100\n"
       "a1:\n"
       "  addi x7, x7, 1\n"
       "  bge x5, x6, a2\n"
       "  addi x7, x7, 2\n"
       "a2:\n"
       "  bge x6, x5, a3\n"
       "  addi x7, x7, 400\n"
       "a3:\n"
       "  ecall\n"},
      {"bltu_bgeu_wrap",
       "entry:\n"
       "  li x5, -1\n"
       "  li x6, 1\n"
       "  li x7, 0\n"
       "  bltu x6, x5, b1\n"
       "  addi x7, x7, 100\n"
       "b1:\n"
       "  addi x7, x7, 1\n"
       "  bgeu x5, x6, b2\n"
       "  addi x7, x7, 200\n"
       "b2:\n"
       "  ecall\n"},
      {"call_return",
       "entry:\n"
       "  li a0, 5\n"
       "  jal ra, double_it\n"
       "  li a1, 7\n"
       "  jal ra, double_it\n"
       "  ecall\n"
       "double_it:\n"
       "  add a0, a0, a0\n"
       "  ret\n"},
      {"nested_calls",
       "entry:\n"
       "  li a0, 1\n"
       "  jal ra, outer\n"
       "  ecall\n"
       "outer:\n"
       "  addi a0, a0, 10\n"
       "  mv s0, ra\n"
       "  jal ra, inner\n"
       "  mv ra, s0\n"
       "  addi a0, a0, 1\n"
       "  ret\n"
       "inner:\n"
       "  addi a0, a0, 100\n"
       "  ret\n"},
      {"memcpy_bytes",
       "entry:\n"
       "  li x5, 0x2800\n"
       "  li x6, 0x41\n"
       "  sb x6, 0(x5)\n"
       "  addi x6, x6, 1\n"
       "  sb x6, 1(x5)\n"
       "  addi x6, x6, 1\n"
       "  sb x6, 2(x5)\n"
       "  li x7, 0x2900\n"
       "  li x8, 0\n"
       "copy:\n"
       "  add x9, x5, x8\n"
       "  lbu x10, 0(x9)\n"
       "  add x11, x7, x8\n"
       "  sb x10, 0(x11)\n"
       "  addi x8, x8, 1\n"
       "  li x12, 3\n"
       "  blt x8, x12, copy\n"
       "  lw x13, 0(x7)\n"
       "  ecall\n"},
      {"array_sum",
       "entry:\n"
       "  li x5, 0x2a00\n"
       "  li x6, 11\n"
       "  sw x6, 0(x5)\n"
       "  li x6, 22\n"
       "  sw x6, 4(x5)\n"
       "  li x6, 33\n"
       "  sw x6, 8(x5)\n"
       "  li x7, 0\n"
       "  li x8, 0\n"
       "sum_loop:\n"
       "  slli x9, x8, 2\n"
       "  add x9, x9, x5\n"
       "  lw x10, 0(x9)\n"
       "  add x7, x7, x10\n"
       "  addi x8, x8, 1\n"
       "  li x11, 3\n"
       "  blt x8, x11, sum_loop\n"
       "  ecall\n"},
      {"overflow_wrap",
       "entry:\n"
       "  li x5, 0x7fffffff\n"
       "  addi x6, x5, 1\n"
       "  li x7, 0\n"
       "  addi x8, x7, -1\n"
       "  add x9, x6, x6\n"
       "  ecall\n"},
      {"sltiu_max",
       "entry:\n"
       "  li x5, 5\n"
       "  sltiu x6, x5, -1\n"
       "  li x7, -1\n"
       "  sltiu x8, x7, -1\n"
       "  ecall\n"},
      {"jalr_link",
       "entry:\n"
       "  la x5, target\n"
       "  jalr x6, 0(x5)\n"
       "after:\n"
       "  li x7, 9\n"
       "  ecall\n"
       "target:\n"
       "  li x8, 42\n"
       "  la x9, after\n"
       "  jalr x0, 0(x9)\n"},
      {"jalr_bit_clear",
       "entry:\n"
       "  la x5, target\n"
       "  addi x5, x5, 1\n"
       "  jalr x6, 0(x5)\n"
       "target:\n"
       "  li x7, 77\n"
       "  ecall\n"},
      {"exit_code",
       "entry:\n"
       "  li a0, 42\n"
       "  ecall\n"},
  };
}

}  // namespace diff_corpus
