#include "vpfuzz/guests.hpp"

#include <filesystem>
#include <sstream>

#include "vpfuzz/assembler.hpp"
#include "vpfuzz/util.hpp"

namespace vpfuzz {

namespace {

void emit_read_loop(std::ostringstream& s, uint32_t buf_addr, bool capped) {
  s << "entry:\n";
  s << "    li t2, " << kUartDataAddr << "\n";
  s << "    li t3, " << buf_addr << "\n";
  s << "    li t4, 0\n";
  s << "read_loop:\n";
  s << "    lbu t0, 0(t2)\n";
  s << "    sb t0, 0(t3)\n";
  s << "    addi t3, t3, 1\n";
  s << "    addi t4, t4, 1\n";
  s << "    li t5, 10\n";  // '\n'
  s << "    beq t0, t5, read_done\n";
  s << "    beqz t0, read_done\n";
  if (capped) {
    s << "    li t5, " << kGuestReadCap << "\n";
    s << "    blt t4, t5, read_loop\n";
  } else {
    s << "    j read_loop\n";
  }
  s << "read_done:\n";
  // Replace the terminator: buf[i-1] = 0.
  s << "    li t3, " << buf_addr << "\n";
  s << "    add t5, t3, t4\n";
  s << "    addi t5, t5, -1\n";
  s << "    sb x0, 0(t5)\n";
}

void emit_caesar(std::ostringstream& s, int shift) {
  // In-place lowercase rotation; other bytes pass through unchanged.
  s << "caesar_loop:\n";
  s << "    lbu t0, 0(t3)\n";
  s << "    beqz t0, caesar_done\n";
  s << "    li t1, 97\n";  // 'a'
  s << "    blt t0, t1, caesar_next\n";
  s << "    li t1, 122\n";  // 'z'
  s << "    blt t1, t0, caesar_next\n";
  s << "    addi t0, t0, " << shift << "\n";
  s << "    li t1, 122\n";
  s << "    bge t1, t0, caesar_store\n";
  s << "    addi t0, t0, -26\n";
  s << "caesar_store:\n";
  s << "    sb t0, 0(t3)\n";
  s << "caesar_next:\n";
  s << "    addi t3, t3, 1\n";
  s << "    j caesar_loop\n";
  s << "caesar_done:\n";
}

void emit_exit_stubs(std::ostringstream& s) {
  s << "fail:\n";
  s << "    li a0, 0\n";
  s << "    j main_return\n";
  s << "main_return:\n";
  s << "    ecall\n";
}

VpConfig base_config(const std::map<std::string, uint32_t>& symbols) {
  VpConfig cfg;
  cfg.load_addr = kDefaultRamBase;
  cfg.entry_pc = symbols.at("entry");
  cfg.stack_top = kDefaultRamBase + kDefaultRamSize;
  cfg.tracked = {{kUartDataAddr, kUartDataAddr}};
  cfg.crash_mode = CrashMode::ReturnRegister;
  cfg.main_return_pc = symbols.at("main_return");
  cfg.persistent = PersistentRange{symbols.at("entry"), symbols.at("main_return")};
  return cfg;
}

GuestBundle finish(std::string name, const std::string& source) {
  AsmResult res = assemble(source, kDefaultRamBase);
  GuestBundle b;
  b.name = std::move(name);
  b.binary = res.binary;
  b.symbols = res.symbols;
  b.config = base_config(res.symbols);
  b.config.image_bytes = b.binary;
  return b;
}

std::string caesar_host(const std::string& text, int shift) {
  std::string out = text;
  for (char& c : out)
    if (c >= 'a' && c <= 'z') c = static_cast<char>('a' + (c - 'a' + shift) % 26);
  return out;
}

}  // namespace

GuestBundle build_password_guest(const std::string& password, int shift,
                                 bool overflow_variant) {
  if (password.empty() || password.size() > 64)
    throw ConfigError("password length must be 1..64");
  for (char c : password)
    if (c < 'a' || c > 'z')
      throw ConfigError("password must be lowercase alphabetic");
  if (shift < 1 || shift > 25) throw ConfigError("shift must be 1..25");

  const std::string cipher = caesar_host(password, shift);
  const uint32_t buf = overflow_variant
                           ? kDefaultRamBase + kDefaultRamSize - kGuestReadCap
                           : kGuestBufAddr;

  std::ostringstream s;
  emit_read_loop(s, buf, !overflow_variant);
  s << "    li t3, " << buf << "\n";
  emit_caesar(s, shift);

  // Unrolled byte-wise compare: one block per position, entered by a taken
  // branch, so each additional matching prefix byte is a distinct edge.
  s << "    li t3, " << buf << "\n";
  for (size_t i = 0; i < cipher.size(); i++) {
    s << "cmp_" << i << ":\n";
    s << "    lbu t0, " << i << "(t3)\n";
    s << "    li t1, " << static_cast<int>(cipher[i]) << "\n";
    s << "    beq t0, t1, cmp_" << (i + 1) << "\n";
    s << "    j fail\n";
  }
  s << "cmp_" << cipher.size() << ":\n";
  s << "    lbu t0, " << cipher.size() << "(t3)\n";
  s << "    beqz t0, match\n";
  s << "    j fail\n";
  s << "match:\n";
  s << "    li a0, 1\n";
  s << "    j main_return\n";
  emit_exit_stubs(s);
  s << "cipher:\n";
  s << "    .ascii \"" << cipher << "\"\n";
  s << "    .byte 0\n";

  return finish(overflow_variant ? "password_overflow" : "password", s.str());
}

GuestBundle build_caesar_debug_guest(int shift) {
  if (shift < 1 || shift > 25) throw ConfigError("shift must be 1..25");
  std::ostringstream s;
  emit_read_loop(s, kGuestBufAddr, true);
  s << "    li t3, " << kGuestBufAddr << "\n";
  emit_caesar(s, shift);
  s << "    li t3, " << kGuestBufAddr << "\n";
  s << "    li t4, " << kGuestScratchAddr << "\n";
  s << "copy_loop:\n";
  s << "    lbu t0, 0(t3)\n";
  s << "    sb t0, 0(t4)\n";
  s << "    addi t3, t3, 1\n";
  s << "    addi t4, t4, 1\n";
  s << "    bnez t0, copy_loop\n";
  s << "    li a0, 0\n";
  s << "    j main_return\n";
  emit_exit_stubs(s);
  return finish("caesar_debug", s.str());
}

GuestBundle build_always_crash_guest() {
  std::ostringstream s;
  s << "entry:\n";
  s << "    li a0, 1\n";
  s << "    j main_return\n";
  emit_exit_stubs(s);
  return finish("always_crash", s.str());
}

GuestBundle build_echo_loop_guest() {
  std::ostringstream s;
  s << "entry:\n";
  s << "    li t2, " << kUartDataAddr << "\n";
  s << "    li t5, 0\n";
  s << "echo:\n";
  s << "    lbu t0, 0(t2)\n";
  s << "    xor t5, t5, t0\n";
  s << "    j echo\n";
  s << "    li a0, 0\n";
  s << "    j main_return\n";
  emit_exit_stubs(s);
  return finish("echo_loop", s.str());
}

GuestBundle build_fault_write_guest() {
  std::ostringstream s;
  s << "entry:\n";
  s << "    li t2, " << kUartDataAddr << "\n";
  s << "    lbu t0, 0(t2)\n";
  s << "    li t1, 0x42\n";
  s << "    beq t0, t1, do_fault\n";
  s << "    li a0, 0\n";
  s << "    j main_return\n";
  s << "do_fault:\n";
  s << "    li t3, 0xF0000000\n";
  s << "    sw x0, 0(t3)\n";
  s << "    li a0, 0\n";
  s << "    j main_return\n";
  emit_exit_stubs(s);
  return finish("fault_write", s.str());
}

GuestBundle build_handler_guest() {
  std::ostringstream s;
  s << "entry:\n";
  s << "    li t2, " << kUartDataAddr << "\n";
  s << "    lbu t0, 0(t2)\n";
  s << "    li t1, 0x80\n";
  s << "    bgeu t0, t1, error_handler\n";
  s << "    li a0, 0\n";
  s << "    j main_return\n";
  s << "error_handler:\n";
  s << "    j error_handler\n";
  emit_exit_stubs(s);
  GuestBundle b = finish("handler_guest", s.str());
  b.config.crash_mode = CrashMode::ErrorHandler;
  b.config.handler_pc = b.symbols.at("error_handler");
  b.config.main_return_pc = 0;
  return b;
}

std::vector<std::string> guest_names() {
  return {"password", "password_overflow", "caesar_debug", "always_crash",
          "echo_loop", "fault_write", "handler_guest"};
}

GuestBundle build_guest_by_name(const std::string& name,
                                const std::string& password, int shift) {
  if (name == "password") return build_password_guest(password, shift, false);
  if (name == "password_overflow") return build_password_guest(password, shift, true);
  if (name == "caesar_debug") return build_caesar_debug_guest(shift);
  if (name == "always_crash") return build_always_crash_guest();
  if (name == "echo_loop") return build_echo_loop_guest();
  if (name == "fault_write") return build_fault_write_guest();
  if (name == "handler_guest") return build_handler_guest();
  throw ConfigError("unknown guest '" + name + "'");
}

void write_bundle(const GuestBundle& bundle, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = dir + "/" + bundle.name;
  write_file_bytes(stem + ".bin", bundle.binary);

  std::ostringstream sym;
  for (const auto& [name, addr] : bundle.symbols)
    sym << name << " " << hex32(addr) << "\n";
  write_file_text(stem + ".sym", sym.str());

  VpConfig cfg = bundle.config;
  cfg.image_bytes.clear();
  cfg.image_path = bundle.name + ".bin";
  write_file_text(stem + ".cfg", serialize_config(cfg));
}

}  // namespace vpfuzz
