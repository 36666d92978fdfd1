#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpfuzz {

struct AsmError : std::runtime_error {
  int line;
  AsmError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
};

struct AsmResult {
  std::vector<uint8_t> binary;
  std::map<std::string, uint32_t> symbols;
  uint32_t base = 0;
};

// Two-pass assembler for the supported instruction subset plus the
// directives .org/.word/.byte/.ascii. Labels end with ':'; '#' starts a
// comment. Branch and jump targets take a label, an absolute address, or a
// pc-relative '.{+,-}offset'.
//
// Pseudo-instructions: nop, li, la, mv, j, ret, beqz, bnez.
AsmResult assemble(const std::string& source, uint32_t base_addr);

// Canonical one-line form of a single instruction word. Words that do not
// decode render as '.word 0x........' so any word round-trips.
std::string disassemble_word(uint32_t word);

}  // namespace vpfuzz
