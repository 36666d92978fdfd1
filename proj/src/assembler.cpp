#include "vpfuzz/assembler.hpp"

#include <cctype>
#include <cstdio>
#include <optional>

#include "vpfuzz/cpu.hpp"

namespace vpfuzz {

namespace {

struct Stmt {
  int line = 0;
  uint32_t addr = 0;
  std::string mnemonic;  // empty for pure-label / directive-only handling
  std::vector<std::string> operands;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  bool in_str = false;
  for (char c : s) {
    if (c == '"') in_str = !in_str;
    if (c == ',' && !in_str) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty()) out.push_back(cur);
  return out;
}

const std::map<std::string, int>& reg_names() {
  static const std::map<std::string, int> names = [] {
    std::map<std::string, int> m;
    for (int i = 0; i < 32; i++) m["x" + std::to_string(i)] = i;
    m["zero"] = 0; m["ra"] = 1; m["sp"] = 2; m["gp"] = 3; m["tp"] = 4;
    m["t0"] = 5; m["t1"] = 6; m["t2"] = 7;
    m["s0"] = 8; m["fp"] = 8; m["s1"] = 9;
    for (int i = 0; i < 8; i++) m["a" + std::to_string(i)] = 10 + i;
    for (int i = 2; i < 12; i++) m["s" + std::to_string(i)] = 16 + i;
    for (int i = 3; i < 7; i++) m["t" + std::to_string(i)] = 25 + i;
    return m;
  }();
  return names;
}

int parse_reg(int line, const std::string& tok) {
  auto it = reg_names().find(tok);
  if (it == reg_names().end()) throw AsmError(line, "unknown register '" + tok + "'");
  return it->second;
}

int64_t parse_int(int line, const std::string& tok) {
  std::string t = tok;
  bool neg = false;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  if (t.empty()) throw AsmError(line, "bad number '" + tok + "'");
  size_t pos = 0;
  unsigned long long v;
  try {
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X'))
      v = std::stoull(t.substr(2), &pos, 16), pos += 2;
    else
      v = std::stoull(t, &pos, 10);
  } catch (const std::exception&) {
    throw AsmError(line, "bad number '" + tok + "'");
  }
  if (pos != t.size()) throw AsmError(line, "bad number '" + tok + "'");
  return neg ? -static_cast<int64_t>(v) : static_cast<int64_t>(v);
}

bool is_number(const std::string& tok) {
  if (tok.empty()) return false;
  size_t i = (tok[0] == '-' || tok[0] == '+') ? 1 : 0;
  return i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]));
}

// Encoders, one per format.
uint32_t enc_r(uint32_t f7, int rs2, int rs1, uint32_t f3, int rd, uint32_t op) {
  return (f7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | op;
}
uint32_t enc_i(int line, int64_t imm, int rs1, uint32_t f3, int rd, uint32_t op) {
  if (imm < -2048 || imm > 2047)
    throw AsmError(line, "immediate " + std::to_string(imm) + " out of 12-bit range");
  return ((static_cast<uint32_t>(imm) & 0xfff) << 20) | (rs1 << 15) | (f3 << 12) |
         (rd << 7) | op;
}
uint32_t enc_s(int line, int64_t imm, int rs2, int rs1, uint32_t f3, uint32_t op) {
  if (imm < -2048 || imm > 2047)
    throw AsmError(line, "store offset " + std::to_string(imm) + " out of range");
  uint32_t u = static_cast<uint32_t>(imm) & 0xfff;
  return ((u >> 5) << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) |
         ((u & 0x1f) << 7) | op;
}
uint32_t enc_b(int line, int64_t disp, int rs2, int rs1, uint32_t f3) {
  if (disp % 2 != 0) throw AsmError(line, "branch target misaligned");
  if (disp < -4096 || disp > 4094)
    throw AsmError(line, "branch displacement " + std::to_string(disp) + " out of range");
  uint32_t u = static_cast<uint32_t>(disp);
  return (((u >> 12) & 1) << 31) | (((u >> 5) & 0x3f) << 25) | (rs2 << 20) |
         (rs1 << 15) | (f3 << 12) | (((u >> 1) & 0xf) << 8) |
         (((u >> 11) & 1) << 7) | 0x63;
}
uint32_t enc_u(int line, int64_t imm20, int rd, uint32_t op) {
  if (imm20 < 0 || imm20 > 0xfffff)
    throw AsmError(line, "upper immediate out of 20-bit range");
  return (static_cast<uint32_t>(imm20) << 12) | (rd << 7) | op;
}
uint32_t enc_j(int line, int64_t disp, int rd) {
  if (disp % 2 != 0) throw AsmError(line, "jump target misaligned");
  if (disp < -(1 << 20) || disp > (1 << 20) - 2)
    throw AsmError(line, "jump displacement " + std::to_string(disp) + " out of range");
  uint32_t u = static_cast<uint32_t>(disp);
  return (((u >> 20) & 1) << 31) | (((u >> 1) & 0x3ff) << 21) |
         (((u >> 11) & 1) << 20) | (((u >> 12) & 0xff) << 12) | (rd << 7) | 0x6f;
}

void split_hi_lo(int64_t value, int64_t& hi, int64_t& lo) {
  uint32_t v = static_cast<uint32_t>(value);
  int32_t low = static_cast<int32_t>(v << 20) >> 20;  // sign-extended low 12
  hi = (v - static_cast<uint32_t>(low)) >> 12;
  lo = low;
}

struct MemOperand {
  int64_t offset;
  int base_reg;
};

MemOperand parse_mem(int line, const std::string& tok,
                     const std::map<std::string, uint32_t>& symbols) {
  size_t open = tok.find('(');
  size_t close = tok.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw AsmError(line, "expected offset(reg), got '" + tok + "'");
  std::string off = trim(tok.substr(0, open));
  std::string reg = trim(tok.substr(open + 1, close - open - 1));
  MemOperand m;
  m.base_reg = parse_reg(line, reg);
  if (off.empty()) {
    m.offset = 0;
  } else if (is_number(off)) {
    m.offset = parse_int(line, off);
  } else {
    auto it = symbols.find(off);
    if (it == symbols.end()) throw AsmError(line, "undefined label '" + off + "'");
    m.offset = it->second;
  }
  return m;
}

class Assembler {
 public:
  Assembler(const std::string& source, uint32_t base) : base_(base) {
    first_pass(source);
    second_pass();
  }

  AsmResult take() {
    return {std::move(binary_), std::move(symbols_), base_};
  }

 private:
  uint32_t base_;
  uint32_t loc_ = 0;  // relative to base_
  std::vector<Stmt> stmts_;
  std::map<std::string, uint32_t> symbols_;
  std::vector<uint8_t> binary_;

  static std::vector<uint8_t> parse_ascii(int line, const std::string& tok) {
    if (tok.size() < 2 || tok.front() != '"' || tok.back() != '"')
      throw AsmError(line, ".ascii expects a quoted string");
    std::vector<uint8_t> out;
    for (size_t i = 1; i + 1 < tok.size(); i++) {
      char c = tok[i];
      if (c == '\\') {
        if (i + 2 >= tok.size() + 1) throw AsmError(line, "dangling escape");
        char e = tok[++i];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '0': out.push_back('\0'); break;
          case '\\': out.push_back('\\'); break;
          case '"': out.push_back('"'); break;
          default: throw AsmError(line, std::string("unknown escape \\") + e);
        }
      } else {
        out.push_back(static_cast<uint8_t>(c));
      }
    }
    return out;
  }

  // Size in bytes a statement will occupy; li needs its literal to decide.
  uint32_t stmt_size(const Stmt& st) const {
    const std::string& m = st.mnemonic;
    if (m == ".org" || m.empty()) return 0;
    if (m == ".word") return 4 * static_cast<uint32_t>(st.operands.size());
    if (m == ".byte") return static_cast<uint32_t>(st.operands.size());
    if (m == ".ascii") {
      if (st.operands.size() != 1) throw AsmError(st.line, ".ascii expects one string");
      return static_cast<uint32_t>(parse_ascii(st.line, st.operands[0]).size());
    }
    if (m == "la") return 8;
    if (m == "li") {
      if (st.operands.size() != 2) throw AsmError(st.line, "li expects rd, imm");
      int64_t v = parse_int(st.line, st.operands[1]);
      return (v >= -2048 && v <= 2047) ? 4 : 8;
    }
    return 4;
  }

  void define_label(int line, const std::string& name) {
    if (symbols_.count(name))
      throw AsmError(line, "label '" + name + "' defined twice");
    symbols_[name] = base_ + loc_;
  }

  void first_pass(const std::string& source) {
    int line_no = 0;
    size_t pos = 0;
    while (pos <= source.size()) {
      size_t nl = source.find('\n', pos);
      std::string raw = source.substr(
          pos, nl == std::string::npos ? std::string::npos : nl - pos);
      pos = nl == std::string::npos ? source.size() + 1 : nl + 1;
      line_no++;

      size_t hash = raw.find('#');
      if (hash != std::string::npos) raw = raw.substr(0, hash);
      std::string s = trim(raw);
      if (s.empty()) continue;

      // Leading labels, possibly several.
      for (;;) {
        size_t colon = s.find(':');
        if (colon == std::string::npos) break;
        std::string head = trim(s.substr(0, colon));
        if (head.empty() || head.find(' ') != std::string::npos ||
            head.find('\t') != std::string::npos)
          break;
        define_label(line_no, head);
        s = trim(s.substr(colon + 1));
      }
      if (s.empty()) continue;

      Stmt st;
      st.line = line_no;
      size_t sp = s.find_first_of(" \t");
      st.mnemonic = sp == std::string::npos ? s : s.substr(0, sp);
      for (char& c : st.mnemonic) c = static_cast<char>(std::tolower(c));
      st.operands =
          sp == std::string::npos ? std::vector<std::string>{} : split_operands(trim(s.substr(sp)));

      if (st.mnemonic == ".org") {
        if (st.operands.size() != 1) throw AsmError(line_no, ".org expects an address");
        int64_t target = parse_int(line_no, st.operands[0]);
        if (target < base_ + loc_)
          throw AsmError(line_no, ".org moves backwards");
        loc_ = static_cast<uint32_t>(target) - base_;
        continue;
      }

      st.addr = base_ + loc_;
      loc_ += stmt_size(st);
      stmts_.push_back(std::move(st));
    }
    binary_.assign(loc_, 0);
  }

  uint32_t symbol_or_value(int line, const std::string& tok) const {
    if (is_number(tok)) return static_cast<uint32_t>(parse_int(line, tok));
    auto it = symbols_.find(tok);
    if (it == symbols_.end()) throw AsmError(line, "undefined label '" + tok + "'");
    return it->second;
  }

  // label, absolute number, or '.{+,-}offset' relative to the instruction.
  int64_t branch_disp(int line, uint32_t pc, const std::string& tok) const {
    if (!tok.empty() && tok[0] == '.') {
      int64_t off = parse_int(line, tok.substr(1));
      return off;
    }
    uint32_t target = symbol_or_value(line, tok);
    return static_cast<int64_t>(target) - static_cast<int64_t>(pc);
  }

  void emit32(uint32_t addr, uint32_t word) {
    uint32_t off = addr - base_;
    for (int i = 0; i < 4; i++)
      binary_[off + i] = static_cast<uint8_t>(word >> (8 * i));
  }

  void need_ops(const Stmt& st, size_t n) const {
    if (st.operands.size() != n)
      throw AsmError(st.line, st.mnemonic + " expects " + std::to_string(n) +
                                  " operands, got " +
                                  std::to_string(st.operands.size()));
  }

  void second_pass() {
    for (const Stmt& st : stmts_) emit_stmt(st);
  }

  void emit_stmt(const Stmt& st) {
    const int line = st.line;
    const uint32_t pc = st.addr;
    const std::string& m = st.mnemonic;
    const auto& ops = st.operands;

    auto reg_at = [&](size_t i) { return parse_reg(line, ops[i]); };
    auto imm_at = [&](size_t i) { return parse_int(line, ops[i]); };

    if (m == ".word") {
      uint32_t a = pc;
      for (const auto& op : ops) {
        emit32(a, static_cast<uint32_t>(parse_int(line, op)));
        a += 4;
      }
      return;
    }
    if (m == ".byte") {
      uint32_t off = pc - base_;
      for (const auto& op : ops)
        binary_[off++] = static_cast<uint8_t>(parse_int(line, op));
      return;
    }
    if (m == ".ascii") {
      auto bytes = parse_ascii(line, ops[0]);
      uint32_t off = pc - base_;
      for (uint8_t b : bytes) binary_[off++] = b;
      return;
    }

    // Pseudo-instructions first.
    if (m == "nop") { emit32(pc, enc_i(line, 0, 0, 0, 0, 0x13)); return; }
    if (m == "mv") {
      need_ops(st, 2);
      emit32(pc, enc_i(line, 0, reg_at(1), 0, reg_at(0), 0x13));
      return;
    }
    if (m == "li") {
      need_ops(st, 2);
      int rd = reg_at(0);
      int64_t v = imm_at(1);
      if (v >= -2048 && v <= 2047) {
        emit32(pc, enc_i(line, v, 0, 0, rd, 0x13));
      } else {
        int64_t hi, lo;
        split_hi_lo(v, hi, lo);
        emit32(pc, enc_u(line, hi, rd, 0x37));
        emit32(pc + 4, enc_i(line, lo, rd, 0, rd, 0x13));
      }
      return;
    }
    if (m == "la") {
      need_ops(st, 2);
      int rd = reg_at(0);
      uint32_t target = symbol_or_value(line, ops[1]);
      int64_t hi, lo;
      split_hi_lo(target, hi, lo);
      emit32(pc, enc_u(line, hi, rd, 0x37));
      emit32(pc + 4, enc_i(line, lo, rd, 0, rd, 0x13));
      return;
    }
    if (m == "j") {
      need_ops(st, 1);
      emit32(pc, enc_j(line, branch_disp(line, pc, ops[0]), 0));
      return;
    }
    if (m == "ret") { emit32(pc, enc_i(line, 0, 1, 0, 0, 0x67)); return; }
    if (m == "beqz") {
      need_ops(st, 2);
      emit32(pc, enc_b(line, branch_disp(line, pc, ops[1]), 0, reg_at(0), 0));
      return;
    }
    if (m == "bnez") {
      need_ops(st, 2);
      emit32(pc, enc_b(line, branch_disp(line, pc, ops[1]), 0, reg_at(0), 1));
      return;
    }

    if (m == "lui" || m == "auipc") {
      need_ops(st, 2);
      emit32(pc, enc_u(line, imm_at(1), reg_at(0), m == "lui" ? 0x37 : 0x17));
      return;
    }
    if (m == "jal") {
      need_ops(st, 2);
      emit32(pc, enc_j(line, branch_disp(line, pc, ops[1]), reg_at(0)));
      return;
    }
    if (m == "jalr") {
      need_ops(st, 2);
      MemOperand mo = parse_mem(line, ops[1], symbols_);
      emit32(pc, enc_i(line, mo.offset, mo.base_reg, 0, reg_at(0), 0x67));
      return;
    }

    static const std::map<std::string, uint32_t> branches = {
        {"beq", 0}, {"bne", 1}, {"blt", 4}, {"bge", 5}, {"bltu", 6}, {"bgeu", 7}};
    if (auto it = branches.find(m); it != branches.end()) {
      need_ops(st, 3);
      emit32(pc, enc_b(line, branch_disp(line, pc, ops[2]), reg_at(1), reg_at(0),
                       it->second));
      return;
    }

    static const std::map<std::string, uint32_t> loads = {
        {"lb", 0}, {"lh", 1}, {"lw", 2}, {"lbu", 4}, {"lhu", 5}};
    if (auto it = loads.find(m); it != loads.end()) {
      need_ops(st, 2);
      MemOperand mo = parse_mem(line, ops[1], symbols_);
      emit32(pc, enc_i(line, mo.offset, mo.base_reg, it->second, reg_at(0), 0x03));
      return;
    }

    static const std::map<std::string, uint32_t> stores = {
        {"sb", 0}, {"sh", 1}, {"sw", 2}};
    if (auto it = stores.find(m); it != stores.end()) {
      need_ops(st, 2);
      MemOperand mo = parse_mem(line, ops[1], symbols_);
      emit32(pc, enc_s(line, mo.offset, reg_at(0), mo.base_reg, it->second, 0x23));
      return;
    }

    static const std::map<std::string, uint32_t> opimm = {
        {"addi", 0}, {"slti", 2}, {"sltiu", 3}, {"xori", 4}, {"ori", 6}, {"andi", 7}};
    if (auto it = opimm.find(m); it != opimm.end()) {
      need_ops(st, 3);
      emit32(pc, enc_i(line, imm_at(2), reg_at(1), it->second, reg_at(0), 0x13));
      return;
    }

    if (m == "slli" || m == "srli" || m == "srai") {
      need_ops(st, 3);
      int64_t sh = imm_at(2);
      if (sh < 0 || sh > 31) throw AsmError(line, "shift amount out of range");
      uint32_t f7 = m == "srai" ? 0x20 : 0;
      uint32_t f3 = m == "slli" ? 1 : 5;
      emit32(pc, enc_r(f7, static_cast<int>(sh), reg_at(1), f3, reg_at(0), 0x13));
      return;
    }

    struct RSpec { uint32_t f3, f7; };
    static const std::map<std::string, RSpec> rops = {
        {"add", {0, 0}},  {"sub", {0, 0x20}}, {"sll", {1, 0}},  {"slt", {2, 0}},
        {"sltu", {3, 0}}, {"xor", {4, 0}},    {"srl", {5, 0}},  {"sra", {5, 0x20}},
        {"or", {6, 0}},   {"and", {7, 0}}};
    if (auto it = rops.find(m); it != rops.end()) {
      need_ops(st, 3);
      emit32(pc, enc_r(it->second.f7, reg_at(2), reg_at(1), it->second.f3,
                       reg_at(0), 0x33));
      return;
    }

    if (m == "ecall") { emit32(pc, 0x00000073); return; }
    if (m == "ebreak") { emit32(pc, 0x00100073); return; }

    throw AsmError(line, "unknown mnemonic '" + m + "'");
  }
};

std::string rname(unsigned r) { return "x" + std::to_string(r); }

std::string rel(int32_t disp) {
  return disp < 0 ? ".-" + std::to_string(-disp) : ".+" + std::to_string(disp);
}

}  // namespace

AsmResult assemble(const std::string& source, uint32_t base_addr) {
  Assembler as(source, base_addr);
  return as.take();
}

std::string disassemble_word(uint32_t word) {
  Instruction ins = decode(word);
  char buf[64];
  auto wordform = [&] {
    std::snprintf(buf, sizeof(buf), ".word 0x%08x", word);
    return std::string(buf);
  };
  switch (ins.op) {
    case Op::Lui:
    case Op::Auipc: {
      std::snprintf(buf, sizeof(buf), "%s %s, 0x%x",
                    ins.op == Op::Lui ? "lui" : "auipc", rname(ins.rd).c_str(),
                    static_cast<uint32_t>(ins.imm) >> 12);
      return buf;
    }
    case Op::Jal:
      return "jal " + rname(ins.rd) + ", " + rel(ins.imm);
    case Op::Jalr:
      return "jalr " + rname(ins.rd) + ", " + std::to_string(ins.imm) + "(" +
             rname(ins.rs1) + ")";
    case Op::Beq: case Op::Bne: case Op::Blt:
    case Op::Bge: case Op::Bltu: case Op::Bgeu: {
      static const char* names[] = {"beq", "bne", "blt", "bge", "bltu", "bgeu"};
      const char* n = names[static_cast<int>(ins.op) - static_cast<int>(Op::Beq)];
      return std::string(n) + " " + rname(ins.rs1) + ", " + rname(ins.rs2) +
             ", " + rel(ins.imm);
    }
    case Op::Lb: case Op::Lh: case Op::Lw: case Op::Lbu: case Op::Lhu: {
      static const char* names[] = {"lb", "lh", "lw", "lbu", "lhu"};
      const char* n = names[static_cast<int>(ins.op) - static_cast<int>(Op::Lb)];
      return std::string(n) + " " + rname(ins.rd) + ", " +
             std::to_string(ins.imm) + "(" + rname(ins.rs1) + ")";
    }
    case Op::Sb: case Op::Sh: case Op::Sw: {
      static const char* names[] = {"sb", "sh", "sw"};
      const char* n = names[static_cast<int>(ins.op) - static_cast<int>(Op::Sb)];
      return std::string(n) + " " + rname(ins.rs2) + ", " +
             std::to_string(ins.imm) + "(" + rname(ins.rs1) + ")";
    }
    case Op::Addi: case Op::Slti: case Op::Sltiu:
    case Op::Xori: case Op::Ori: case Op::Andi: {
      static const std::map<Op, const char*> names = {
          {Op::Addi, "addi"}, {Op::Slti, "slti"}, {Op::Sltiu, "sltiu"},
          {Op::Xori, "xori"}, {Op::Ori, "ori"},   {Op::Andi, "andi"}};
      return std::string(names.at(ins.op)) + " " + rname(ins.rd) + ", " +
             rname(ins.rs1) + ", " + std::to_string(ins.imm);
    }
    case Op::Slli: case Op::Srli: case Op::Srai: {
      static const std::map<Op, const char*> names = {
          {Op::Slli, "slli"}, {Op::Srli, "srli"}, {Op::Srai, "srai"}};
      return std::string(names.at(ins.op)) + " " + rname(ins.rd) + ", " +
             rname(ins.rs1) + ", " + std::to_string(ins.imm);
    }
    case Op::Add: case Op::Sub: case Op::Sll: case Op::Slt: case Op::Sltu:
    case Op::Xor: case Op::Srl: case Op::Sra: case Op::Or: case Op::And: {
      static const std::map<Op, const char*> names = {
          {Op::Add, "add"}, {Op::Sub, "sub"}, {Op::Sll, "sll"},
          {Op::Slt, "slt"}, {Op::Sltu, "sltu"}, {Op::Xor, "xor"},
          {Op::Srl, "srl"}, {Op::Sra, "sra"}, {Op::Or, "or"}, {Op::And, "and"}};
      return std::string(names.at(ins.op)) + " " + rname(ins.rd) + ", " +
             rname(ins.rs1) + ", " + rname(ins.rs2);
    }
    case Op::Ecall: return "ecall";
    case Op::Ebreak: return "ebreak";
    case Op::Illegal: return wordform();
  }
  return wordform();
}

}  // namespace vpfuzz
