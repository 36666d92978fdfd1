#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "vpfuzz/assembler.hpp"
#include "vpfuzz/guests.hpp"
#include "vpfuzz/harness.hpp"
#include "vpfuzz/util.hpp"

using namespace vpfuzz;
namespace fs = std::filesystem;

namespace {

std::vector<uint8_t> bytes_of(const std::string& s) {
  return std::vector<uint8_t>(s.begin(), s.end());
}

// Writes a bundle to a temp dir so process mode can load it from disk.
struct DiskGuest {
  fs::path dir;
  VpConfig config;

  explicit DiskGuest(const GuestBundle& bundle) {
    dir = fs::temp_directory_path() /
          ("vpfuzz_test_" + std::to_string(::getpid()) + "_" + bundle.name);
    fs::remove_all(dir);
    write_bundle(bundle, dir.string());
    config = bundle.config;
    config.image_bytes.clear();
    config.image_path = (dir / (bundle.name + ".bin")).string();
  }
  ~DiskGuest() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

std::string vp_binary() {
  const char* env = ::getenv("VPFUZZ_BIN");
  REQUIRE_MESSAGE(env != nullptr, "VPFUZZ_BIN must point at the CLI binary");
  return env;
}

}  // namespace

TEST_CASE("snapshot fidelity: restore-then-run equals fresh-spawn-then-run") {
  std::vector<GuestBundle> bundles = {
      build_password_guest("hello", 1), build_echo_loop_guest(),
      build_fault_write_guest(), build_handler_guest()};
  for (const GuestBundle& g : bundles) {
    INFO("guest ", g.name);
    EmbeddedVp vp(g.config);
    RunResult a = vp.run_case(bytes_of("hel\n"));
    RunResult b = vp.run_case(bytes_of("hel\n"));
    CHECK(a.exit == b.exit);
    CHECK(a.instructions == b.instructions);
    CHECK(a.probe_reads == b.probe_reads);
    CHECK(a.coverage == b.coverage);

    EmbeddedVp fresh(g.config);
    RunResult c = fresh.run_case(bytes_of("hel\n"));
    CHECK(a.exit == c.exit);
    CHECK(a.instructions == c.instructions);
    CHECK(a.coverage == c.coverage);
  }
}

TEST_CASE("result payload mapping preserves every field") {
  RunResult r;
  r.exit = ExitKind::crash(CrashReasonTag::HardwareFault,
                           static_cast<uint32_t>(FaultKind::MisalignedAccess));
  r.instructions = 12345;
  r.exec_us = 67;
  r.coverage.assign(kCoverageMapSize, 0);
  r.coverage[100] = 3;
  RunResult back = payload_to_result(result_to_payload(r));
  CHECK(back.exit == r.exit);
  CHECK(back.instructions == r.instructions);
  CHECK(back.exec_us == r.exec_us);
  CHECK(back.coverage == r.coverage);
}

TEST_CASE("process mode: spawn, configure, run, shutdown") {
  GuestBundle g = build_password_guest("hello", 1);
  DiskGuest disk(g);

  ProcessVp vp(disk.config, vp_binary());
  CHECK(vp.alive());
  CHECK(vp.timings.startup_ms > 0);

  RunResult r = vp.run_case(bytes_of("hello\n"));
  CHECK(r.exit.tag == ExitKindTag::Crash);
  CHECK(r.exit.reason == CrashReasonTag::ReturnValueNonzero);
  CHECK(r.exit.value == 1);

  // Coverage over the wire matches an embedded run byte for byte.
  EmbeddedVp emb(g.config);
  RunResult e = emb.run_case(bytes_of("hello\n"));
  CHECK(r.coverage == e.coverage);
  CHECK(r.instructions == e.instructions);

  vp.shutdown();
  CHECK_FALSE(vp.alive());
}

TEST_CASE("process mode: bad config is rejected through the wire") {
  GuestBundle g = build_password_guest("hello", 1);
  DiskGuest disk(g);
  VpConfig broken = disk.config;
  broken.image_path = disk.config.image_path + ".does_not_exist";
  CHECK_THROWS_AS(ProcessVp(broken, vp_binary()), ConfigError);
}

TEST_CASE("restart and persistent modes agree on a corpus") {
  GuestBundle g = build_password_guest("hello", 1);
  DiskGuest disk(g);

  std::vector<std::vector<uint8_t>> corpus = {
      bytes_of(""),       bytes_of("a"),        bytes_of("hello\n"),
      bytes_of("hellp\n"), bytes_of("h\n"),     bytes_of("xyz"),
      bytes_of("hel\n"),  bytes_of("\n"),       bytes_of(std::string(200, 'q')),
      bytes_of("hello")};

  CaseRunner restart(disk.config, ExecMode::Restart, vp_binary());
  CaseRunner persistent(disk.config, ExecMode::Persistent);

  for (const auto& input : corpus) {
    RunResult a = restart.run(input);
    RunResult b = persistent.run(input);
    INFO("input size ", input.size());
    CHECK(a.exit == b.exit);
    CHECK(a.coverage == b.coverage);
    CHECK(a.instructions == b.instructions);
  }
  CHECK(restart.spawn_count() == corpus.size());
}

TEST_CASE("persistent mode: one spawn for many clean runs") {
  GuestBundle g = build_password_guest("hello", 1);
  CaseRunner runner(g.config, ExecMode::Persistent);
  for (int i = 0; i < 100; i++) {
    RunResult r = runner.run(bytes_of("nope\n"));
    CHECK(r.exit == ExitKind::ok());
  }
  CHECK(runner.spawn_count() == 1);
}

TEST_CASE("persistent mode: a crash forces one respawn") {
  GuestBundle g = build_password_guest("hello", 1);
  CaseRunner runner(g.config, ExecMode::Persistent);
  for (int i = 0; i < 100; i++) {
    bool crash_run = i == 49;
    RunResult r = runner.run(bytes_of(crash_run ? "hello\n" : "nope\n"));
    CHECK((r.exit.tag == ExitKindTag::Crash) == crash_run);
  }
  CHECK(runner.spawn_count() == 2);
}

TEST_CASE("persistent exit that is never reached times out, campaign continues") {
  AsmResult prog = assemble(
      "entry:\nspin:\n  j spin\nexitpoint:\n  nop\nmain_return:\n  ecall\n",
      kDefaultRamBase);
  VpConfig cfg;
  cfg.entry_pc = prog.symbols.at("entry");
  cfg.tracked = {{kUartDataAddr, kUartDataAddr}};
  cfg.crash_mode = CrashMode::ReturnRegister;
  cfg.main_return_pc = prog.symbols.at("main_return");
  cfg.persistent = PersistentRange{prog.symbols.at("entry"),
                                   prog.symbols.at("exitpoint")};
  cfg.max_instructions = 5000;
  cfg.image_bytes = prog.binary;

  CaseRunner runner(cfg, ExecMode::Persistent);
  for (int i = 0; i < 3; i++) {
    RunResult r = runner.run(bytes_of("x"));
    CHECK(r.exit.tag == ExitKindTag::Timeout);
    CHECK(r.instructions == 5000);
  }
  CHECK(runner.spawn_count() == 1);
}

TEST_CASE("wall-clock backstop ends runs with huge instruction budgets") {
  AsmResult prog = assemble("entry:\n  j entry\nmain_return:\n  ecall\n",
                            kDefaultRamBase);
  VpConfig cfg;
  cfg.entry_pc = prog.symbols.at("entry");
  cfg.crash_mode = CrashMode::ReturnRegister;
  cfg.main_return_pc = prog.symbols.at("main_return");
  cfg.max_instructions = ~0ull;
  cfg.timeout_ms = 200;
  cfg.image_bytes = prog.binary;

  EmbeddedVp vp(cfg);
  double t0 = now_ms();
  RunResult r = vp.run_case({});
  double elapsed = now_ms() - t0;
  CHECK(r.exit.tag == ExitKindTag::Timeout);
  CHECK(elapsed < 5000);
}

TEST_CASE("jump-only persistent re-entry leaks state across runs") {
  AsmResult prog = assemble(
      "entry:\n"
      "  li t3, 0x3000\n"
      "  lw t0, 0(t3)\n"
      "  addi t1, t0, 1\n"
      "  sw t1, 0(t3)\n"
      "  beqz t0, first\n"
      "  li a0, 2\n"
      "  j main_return\n"
      "first:\n"
      "  li a0, 0\n"
      "  j main_return\n"
      "main_return:\n"
      "  ecall\n",
      kDefaultRamBase);

  VpConfig cfg;
  cfg.entry_pc = prog.symbols.at("entry");
  cfg.crash_mode = CrashMode::ReturnRegister;
  cfg.main_return_pc = prog.symbols.at("main_return");
  cfg.persistent = PersistentRange{prog.symbols.at("entry"),
                                   prog.symbols.at("main_return")};
  cfg.image_bytes = prog.binary;

  // Default restore semantics: every run starts from the same state.
  {
    EmbeddedVp vp(cfg);
    CHECK(vp.run_case({}).exit == ExitKind::ok());
    CHECK(vp.run_case({}).exit == ExitKind::ok());
  }
  // Literal jump-only re-entry: the second run sees the first run's writes.
  {
    VpConfig leaky = cfg;
    leaky.persistent->jump_only = true;
    EmbeddedVp vp(leaky);
    CHECK(vp.run_case({}).exit == ExitKind::ok());
    RunResult second = vp.run_case({});
    CHECK(second.exit.tag == ExitKindTag::Crash);
    CHECK(second.exit.value == 2);
  }
}

TEST_CASE("spawn validation: persistent entry must be reachable") {
  AsmResult prog = assemble(
      "entry:\n  li a0, 0\n  j main_return\nunreached:\n  nop\n"
      "main_return:\n  ecall\n",
      kDefaultRamBase);
  VpConfig cfg;
  cfg.entry_pc = prog.symbols.at("entry");
  cfg.crash_mode = CrashMode::ReturnRegister;
  cfg.main_return_pc = prog.symbols.at("main_return");
  cfg.persistent = PersistentRange{prog.symbols.at("unreached"),
                                   prog.symbols.at("main_return")};
  cfg.image_bytes = prog.binary;
  CHECK_THROWS_AS(EmbeddedVp{cfg}, ConfigError);
}
