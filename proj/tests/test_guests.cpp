#include <doctest.h>

#include <string>

#include "vpfuzz/assembler.hpp"
#include "vpfuzz/guests.hpp"
#include "vpfuzz/harness.hpp"
#include "vpfuzz/util.hpp"

using namespace vpfuzz;

namespace {

// Independent shift oracle, written before the guest generator.
std::string caesar_oracle(const std::string& s, int shift) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'a' && c <= 'z')
      c = static_cast<char>('a' + ((c - 'a') + shift) % 26);
  return out;
}

std::vector<uint8_t> bytes_of(const std::string& s) {
  return std::vector<uint8_t>(s.begin(), s.end());
}

RunResult run_guest(const GuestBundle& bundle, const std::string& input) {
  EmbeddedVp vp(bundle.config);
  return vp.run_case(bytes_of(input));
}

}  // namespace

TEST_CASE("embedded cipher equals the oracle's output") {
  CHECK(caesar_oracle("hello", 1) == "ifmmp");
  GuestBundle g = build_password_guest("hello", 1);
  uint32_t cipher_addr = g.symbols.at("cipher");
  uint32_t off = cipher_addr - kDefaultRamBase;
  std::string embedded(g.binary.begin() + off, g.binary.begin() + off + 5);
  CHECK(embedded == "ifmmp");
  CHECK(g.binary[off + 5] == 0);  // terminator
}

TEST_CASE("password guest: correct password crashes via the return register") {
  GuestBundle g = build_password_guest("hello", 1);
  RunResult r = run_guest(g, "hello\n");
  CHECK(r.exit.tag == ExitKindTag::Crash);
  CHECK(r.exit.reason == CrashReasonTag::ReturnValueNonzero);
  CHECK(r.exit.value == 1);
}

TEST_CASE("password guest: near misses exit cleanly") {
  GuestBundle g = build_password_guest("hello", 1);
  CHECK(run_guest(g, "hellp\n").exit == ExitKind::ok());
  CHECK(run_guest(g, "xyzzy\n").exit == ExitKind::ok());
  CHECK(run_guest(g, "\n").exit == ExitKind::ok());
  // Longer input with the right prefix still mismatches on the terminator.
  CHECK(run_guest(g, "helloo\n").exit == ExitKind::ok());
}

TEST_CASE("password guest: unterminated input exhausts the stream") {
  GuestBundle g = build_password_guest("hello", 1);
  RunResult r = run_guest(g, "hello");
  CHECK(r.exit.tag == ExitKindTag::InputExhausted);
  CHECK(r.probe_reads == 5);
}

TEST_CASE("password guest: read loop caps at 128 and stays in bounds") {
  GuestBundle g = build_password_guest("hello", 1);
  std::string long_input(200, 'q');
  RunResult r = run_guest(g, long_input);
  CHECK(r.exit == ExitKind::ok());  // mismatch, clean exit
  CHECK(r.probe_reads == kGuestReadCap);
}

TEST_CASE("password overflow variant faults in the guard page") {
  GuestBundle g = build_password_guest("hello", 1, true);
  std::string long_input(200, 'q');
  RunResult r = run_guest(g, long_input);
  CHECK(r.exit.tag == ExitKindTag::Crash);
  CHECK(r.exit.reason == CrashReasonTag::HardwareFault);
  CHECK(static_cast<FaultKind>(r.exit.value) == FaultKind::StackOverflowGuard);
  // The safe inputs still behave.
  CHECK(run_guest(g, "hello\n").exit.value == 1);
  CHECK(run_guest(g, "nope\n").exit == ExitKind::ok());
}

TEST_CASE("coverage ladder: each correct prefix byte adds nonzero map bytes") {
  GuestBundle g = build_password_guest("hello", 1);
  EmbeddedVp vp(g.config);
  const std::string password = "hello";
  size_t prev = 0;
  for (size_t k = 0; k <= password.size(); k++) {
    std::string input = password.substr(0, k) + "\n";
    RunResult r = vp.run_case(bytes_of(input));
    CoverageMap m;
    m.bytes = r.coverage;
    size_t nz = m.nonzero_bytes();
    INFO("prefix length ", k, " nonzero ", nz);
    if (k > 0) CHECK(nz > prev);
    prev = nz;
  }
}

TEST_CASE("caesar debug guest matches the oracle on scratch readback") {
  for (int shift : {1, 3, 13, 25}) {
    GuestBundle g = build_caesar_debug_guest(shift);
    EmbeddedVp vp(g.config);
    for (const auto& text :
         {std::string("hello"), std::string("abcxyz"), std::string("zz"),
          std::string("a1b!c")}) {
      RunResult r = vp.run_case(bytes_of(text + "\n"));
      CHECK(r.exit == ExitKind::ok());
      std::string expect = caesar_oracle(text, shift);
      std::string got;
      for (size_t i = 0; i < text.size(); i++)
        got += static_cast<char>(
            vp.sim().memory().read(kGuestScratchAddr + static_cast<uint32_t>(i), 1));
      INFO("shift ", shift, " text ", text);
      CHECK(got == expect);
      // NUL copied too.
      CHECK(vp.sim().memory().read(
                kGuestScratchAddr + static_cast<uint32_t>(text.size()), 1) == 0);
    }
  }
}

TEST_CASE("always_crash crashes on any input including empty") {
  GuestBundle g = build_always_crash_guest();
  RunResult r = run_guest(g, "");
  CHECK(r.exit.tag == ExitKindTag::Crash);
  CHECK(r.exit.reason == CrashReasonTag::ReturnValueNonzero);
  CHECK(r.exit.value == 1);
}

TEST_CASE("echo_loop consumes everything then reports exhaustion") {
  GuestBundle g = build_echo_loop_guest();
  RunResult r = run_guest(g, "abcdef");
  CHECK(r.exit.tag == ExitKindTag::InputExhausted);
  CHECK(r.probe_reads == 6);
  RunResult empty = run_guest(g, "");
  CHECK(empty.exit.tag == ExitKindTag::InputExhausted);
  CHECK(empty.probe_reads == 0);
}

TEST_CASE("echo_loop under ZeroFill runs to the instruction budget") {
  GuestBundle g = build_echo_loop_guest();
  VpConfig cfg = g.config;
  cfg.exhaustion = ExhaustionPolicy::ZeroFill;
  cfg.max_instructions = 3000;
  EmbeddedVp vp(cfg);
  RunResult r = vp.run_case(std::vector<uint8_t>{1, 2});
  CHECK(r.exit.tag == ExitKindTag::Timeout);
  CHECK(r.instructions == 3000);
  // Reads keep succeeding with zero padding after the input runs dry.
  CHECK(r.probe_reads > 2);
}

TEST_CASE("fault_write stores to an unmapped address on the magic byte") {
  GuestBundle g = build_fault_write_guest();
  RunResult r = run_guest(g, "\x42");
  CHECK(r.exit.tag == ExitKindTag::Crash);
  CHECK(r.exit.reason == CrashReasonTag::HardwareFault);
  CHECK(static_cast<FaultKind>(r.exit.value) == FaultKind::BusError);
  CHECK(run_guest(g, "x").exit == ExitKind::ok());
}

TEST_CASE("handler_guest reaches the error handler breakpoint on bad bytes") {
  GuestBundle g = build_handler_guest();
  CHECK(g.config.crash_mode == CrashMode::ErrorHandler);
  RunResult r = run_guest(g, "\x90");
  CHECK(r.exit.tag == ExitKindTag::Crash);
  CHECK(r.exit.reason == CrashReasonTag::ErrorHandlerReached);
  CHECK(run_guest(g, "a").exit == ExitKind::ok());
}

TEST_CASE("loaded image decodes to the assembler's first emitted instruction") {
  GuestBundle g = build_password_guest("hello", 1);
  GuestMemory mem;
  load_image(mem, g.binary, kDefaultRamBase);
  uint32_t first = mem.read(g.symbols.at("entry"), 4);
  // entry starts with `li t2, <uart>`, which expands to lui t2.
  Instruction ins = decode(first);
  CHECK(ins.op == Op::Lui);
  CHECK(ins.rd == 7);  // t2
  CHECK(disassemble_word(first) == "lui x7, 0x40002");
}

TEST_CASE("guest builds are deterministic") {
  CHECK(build_password_guest("magic", 2).binary ==
        build_password_guest("magic", 2).binary);
  CHECK(build_handler_guest().binary == build_handler_guest().binary);
}

TEST_CASE("password parameter validation") {
  CHECK_THROWS_AS(build_password_guest("", 1), ConfigError);
  CHECK_THROWS_AS(build_password_guest("Hello", 1), ConfigError);
  CHECK_THROWS_AS(build_password_guest("ok", 0), ConfigError);
  CHECK_THROWS_AS(build_password_guest("ok", 26), ConfigError);
  CHECK_THROWS_AS(build_password_guest(std::string(65, 'a'), 1), ConfigError);
  // Longest allowed password still assembles and detects its match.
  GuestBundle g = build_password_guest(std::string(64, 'z'), 25);
  RunResult r = run_guest(g, std::string(64, 'z') + "\n");
  CHECK(r.exit.value == 1);
}
