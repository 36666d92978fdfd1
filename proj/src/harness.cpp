#include "vpfuzz/harness.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "vpfuzz/util.hpp"

extern char** environ;

namespace vpfuzz {

const char* crash_reason_name(CrashReasonTag r) {
  switch (r) {
    case CrashReasonTag::None: return "none";
    case CrashReasonTag::ReturnValueNonzero: return "return_value_nonzero";
    case CrashReasonTag::ErrorHandlerReached: return "error_handler_reached";
    case CrashReasonTag::HardwareFault: return "hardware_fault";
  }
  return "unknown";
}

std::string exit_kind_to_string(const ExitKind& k) {
  switch (k.tag) {
    case ExitKindTag::Ok:
      return "OK";
    case ExitKindTag::Timeout:
      return "TIMEOUT";
    case ExitKindTag::InputExhausted:
      return "INPUT_EXHAUSTED";
    case ExitKindTag::Crash:
      switch (k.reason) {
        case CrashReasonTag::ReturnValueNonzero:
          return "CRASH return_value=" + std::to_string(k.value);
        case CrashReasonTag::ErrorHandlerReached:
          return "CRASH error_handler";
        case CrashReasonTag::HardwareFault:
          return std::string("CRASH hardware_fault=") +
                 fault_kind_name(static_cast<FaultKind>(k.value));
        case CrashReasonTag::None:
          break;
      }
      return "CRASH";
  }
  return "UNKNOWN";
}

const char* exec_mode_name(ExecMode m) {
  return m == ExecMode::Restart ? "restart" : "persistent";
}

ExitKind classify_stop(const SimStop& stop, const CpuState& cpu,
                       const VpConfig& cfg) {
  switch (stop.kind) {
    case StopKind::Fault:
      return ExitKind::crash(CrashReasonTag::HardwareFault,
                             static_cast<uint32_t>(stop.fault));
    case StopKind::ConfigBreakpoint:
      if (cfg.crash_mode == CrashMode::ErrorHandler &&
          stop.addr == cfg.handler_pc)
        return ExitKind::crash(CrashReasonTag::ErrorHandlerReached, 0);
      if (cfg.crash_mode == CrashMode::ReturnRegister &&
          stop.addr == cfg.main_return_pc) {
        uint32_t ret = cpu.regs[reg::a0];
        return ret != 0 ? ExitKind::crash(CrashReasonTag::ReturnValueNonzero, ret)
                        : ExitKind::ok();
      }
      if (cfg.persistent && stop.addr == cfg.persistent->exit_pc)
        return ExitKind::ok();
      // A breakpoint nobody configured; treat like a debug trap.
      return ExitKind::crash(CrashReasonTag::HardwareFault,
                             static_cast<uint32_t>(FaultKind::IllegalInstruction));
    case StopKind::GuestBreak:
      return ExitKind::crash(CrashReasonTag::HardwareFault,
                             static_cast<uint32_t>(FaultKind::IllegalInstruction));
    case StopKind::Exited:
      return stop.exit_code != 0
                 ? ExitKind::crash(CrashReasonTag::ReturnValueNonzero,
                                   stop.exit_code)
                 : ExitKind::ok();
    case StopKind::InputExhausted:
      return ExitKind::exhausted();
    case StopKind::Timeout:
    case StopKind::WallTimeout:
      return ExitKind::timeout();
  }
  return ExitKind::timeout();
}

// ---------------------------------------------------------------------------
// EmbeddedVp

EmbeddedVp::EmbeddedVp(const VpConfig& cfg) : cfg_(cfg) {
  validate_config(cfg_);

  double t0 = now_ms();
  std::vector<uint8_t> image = cfg_.image_bytes;
  if (image.empty()) {
    if (cfg_.image_path.empty())
      throw ConfigError("no guest image configured");
    image = read_file_bytes(cfg_.image_path);
  }
  ProbeConfig pc;
  pc.tracked = cfg_.tracked;
  pc.exhaustion = cfg_.exhaustion;
  pc.write_policy = cfg_.write_policy;
  sim_ = std::make_unique<Simulator>(kDefaultRamBase, kDefaultRamSize, pc);
  sim_->load_image(image, cfg_.load_addr);
  timings.startup_ms = now_ms() - t0;

  double t1 = now_ms();
  sim_->reset_cpu(cfg_.entry_pc, cfg_.stack_top);

  limits_.max_instructions = cfg_.max_instructions;
  if (cfg_.crash_mode == CrashMode::ReturnRegister)
    limits_.breakpoints.push_back(cfg_.main_return_pc);
  else
    limits_.breakpoints.push_back(cfg_.handler_pc);
  if (cfg_.persistent) limits_.breakpoints.push_back(cfg_.persistent->exit_pc);

  // Reach the persistent entry before snapshotting. No input is armed yet:
  // a guest that reads tracked addresses before its persistent entry cannot
  // be snapshotted deterministically.
  if (cfg_.persistent && cfg_.persistent->entry_pc != cfg_.entry_pc) {
    RunLimits pre;
    pre.max_instructions = cfg_.max_instructions;
    pre.breakpoints = {cfg_.persistent->entry_pc};
    sim_->probe().arm({});
    SimRunResult r = sim_->run_until(pre);
    if (r.stop.kind != StopKind::ConfigBreakpoint ||
        r.stop.addr != cfg_.persistent->entry_pc)
      throw ConfigError("persistent entry " + hex32(cfg_.persistent->entry_pc) +
                        " not reached from entry point");
  }
  sim_->mark_reset_point();
  timings.config_ms = now_ms() - t1;
}

void EmbeddedVp::set_trace_probe(bool on) {
  if (!on) {
    sim_->probe().set_trace(nullptr);
    return;
  }
  sim_->probe().set_trace([](const ProbeEvent& ev) {
    std::fprintf(stderr, "PROBE pc=0x%08x addr=0x%08x size=%u value=0x%x\n",
                 ev.pc, ev.addr, ev.size, ev.value);
  });
}

RunResult EmbeddedVp::run_case(std::span<const uint8_t> input) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();

  if (cfg_.persistent && cfg_.persistent->jump_only) {
    // Literal re-entry: leave registers and memory as the last run left
    // them. Not reproducible across runs; exists for comparison only.
    sim_->cpu().status = CpuStatus{};
    sim_->cpu().pc = sim_->reset_point().taken_at_pc;
  } else {
    sim_->restore_reset_point();
  }
  sim_->probe().arm(input);
  sim_->bus().reset_counters();

  RunLimits limits = limits_;
  limits.wall_deadline = t0 + std::chrono::milliseconds(cfg_.timeout_ms);
  SimRunResult r = sim_->run_until(limits);

  RunResult out;
  out.exit = classify_stop(r.stop, sim_->cpu(), cfg_);
  out.instructions = r.instructions;
  out.probe_reads = sim_->probe().cursor().reads_served;
  out.exec_us = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(clock::now() - t0)
          .count());
  out.coverage = sim_->coverage().bytes;
  return out;
}

// ---------------------------------------------------------------------------
// ProcessVp

namespace {

bool write_all(int fd, const uint8_t* data, size_t len) {
  size_t off = 0;
  while (off < len) {
    ssize_t n = ::write(fd, data + off, len - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<size_t>(n);
  }
  return true;
}

}  // namespace

std::string default_vp_binary() {
  if (const char* env = ::getenv("VPFUZZ_BIN"); env && *env) return env;
  std::error_code ec;
  auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (ec) throw HarnessError("cannot resolve own binary path");
  return p.string();
}

ProcessVp::ProcessVp(const VpConfig& cfg, const std::string& binary_path)
    : run_timeout_ms_(cfg.timeout_ms) {
  if (cfg.image_path.empty())
    throw ConfigError("process mode requires an on-disk guest image");

  double t0 = now_ms();

  int to_child[2] = {-1, -1};
  int from_child[2] = {-1, -1};
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw HarnessError("pipe() failed");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], 0);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], 1);
  posix_spawn_file_actions_addclose(&actions, to_child[1]);
  posix_spawn_file_actions_addclose(&actions, from_child[0]);

  std::string bin = binary_path;
  char* argv[] = {bin.data(), const_cast<char*>("vp-serve"), nullptr};
  pid_t pid = -1;
  int rc = posix_spawn(&pid, bin.c_str(), &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw HarnessError("cannot spawn VP process '" + bin + "': " +
                       std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
  alive_ = true;

  Frame f;
  if (!read_frame(f, 5000) || f.type != MsgType::Ready) {
    kill_child();
    throw HarnessError("VP process did not report READY");
  }
  timings.startup_ms = now_ms() - t0;

  double t1 = now_ms();
  VpConfig wire_cfg = cfg;
  wire_cfg.image_path = std::filesystem::absolute(wire_cfg.image_path).string();
  std::string text = serialize_config(wire_cfg);
  if (!write_frame({MsgType::Configure,
                    std::vector<uint8_t>(text.begin(), text.end())})) {
    kill_child();
    throw HarnessError("VP process died during configuration");
  }
  if (!read_frame(f, 5000)) {
    kill_child();
    throw HarnessError("VP process died during configuration");
  }
  if (f.type == MsgType::Error) {
    std::string msg(f.payload.begin(), f.payload.end());
    kill_child();
    throw ConfigError("VP rejected configuration: " + msg);
  }
  if (f.type != MsgType::Ready) {
    kill_child();
    throw HarnessError("unexpected frame during configuration handshake");
  }
  timings.config_ms = now_ms() - t1;
}

ProcessVp::~ProcessVp() { kill_child(); }

void ProcessVp::kill_child() {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  alive_ = false;
}

bool ProcessVp::write_frame(const Frame& f) {
  if (!alive_) return false;
  auto bytes = encode_frame(f);
  if (!write_all(to_child_, bytes.data(), bytes.size())) {
    alive_ = false;
    return false;
  }
  return true;
}

bool ProcessVp::read_frame(Frame& out, int timeout_ms) {
  using clock = std::chrono::steady_clock;
  auto deadline = clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    DecodeOutcome d = decode_frame(rxbuf_);
    if (d.status == DecodeStatus::Ok) {
      out = std::move(d.frame);
      rxbuf_.erase(rxbuf_.begin(), rxbuf_.begin() + static_cast<long>(d.consumed));
      return true;
    }
    if (d.status == DecodeStatus::Error)
      throw HarnessError("protocol violation from VP at offset " +
                         std::to_string(d.error_offset) + ": " + d.message);

    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - clock::now())
                    .count();
    if (left <= 0) return false;

    struct pollfd pfd = {from_child_, POLLIN, 0};
    int pr = ::poll(&pfd, 1, static_cast<int>(left));
    if (pr < 0) {
      if (errno == EINTR) continue;
      alive_ = false;
      return false;
    }
    if (pr == 0) return false;  // deadline

    uint8_t tmp[65536];
    ssize_t n = ::read(from_child_, tmp, sizeof(tmp));
    if (n <= 0) {
      alive_ = false;
      return false;
    }
    rxbuf_.insert(rxbuf_.end(), tmp, tmp + n);
  }
}

RunResult ProcessVp::run_case(std::span<const uint8_t> input) {
  RunResult dead;
  dead.exit = ExitKind::crash(CrashReasonTag::HardwareFault,
                              static_cast<uint32_t>(FaultKind::BusError));
  dead.coverage.assign(kCoverageMapSize, 0);

  if (!alive_ || !write_frame({MsgType::Run,
                               std::vector<uint8_t>(input.begin(), input.end())})) {
    kill_child();
    return dead;
  }
  Frame f;
  // The VP applies the deterministic budgets itself; the poll deadline is a
  // hang backstop.
  if (!read_frame(f, static_cast<int>(run_timeout_ms_) + 1000)) {
    bool was_alive = alive_;
    kill_child();
    if (was_alive) {
      RunResult r;
      r.exit = ExitKind::timeout();
      r.coverage.assign(kCoverageMapSize, 0);
      return r;
    }
    return dead;
  }
  if (f.type == MsgType::Error) {
    std::string msg(f.payload.begin(), f.payload.end());
    kill_child();
    throw HarnessError("VP error: " + msg);
  }
  if (f.type != MsgType::Result) {
    kill_child();
    throw HarnessError("unexpected frame in response to RUN");
  }
  ResultPayload p;
  if (!decode_result(f.payload, p)) {
    kill_child();
    throw HarnessError("malformed RESULT payload");
  }
  return payload_to_result(p);
}

void ProcessVp::shutdown() {
  if (!alive_) return;
  write_frame({MsgType::Shutdown, {}});
  if (pid_ > 0) {
    // Give it a moment to exit cleanly, then force.
    for (int i = 0; i < 100; i++) {
      int status = 0;
      pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        pid_ = -1;
        break;
      }
      usleep(1000);
    }
  }
  kill_child();
}

// ---------------------------------------------------------------------------

ResultPayload result_to_payload(const RunResult& r) {
  ResultPayload p;
  p.exit_kind = static_cast<uint8_t>(r.exit.tag);
  p.crash_reason = static_cast<uint8_t>(r.exit.reason);
  p.exit_value = r.exit.value;
  p.instructions = r.instructions;
  p.exec_us = r.exec_us;
  p.coverage = r.coverage;
  p.coverage.resize(kCoverageMapSize, 0);
  return p;
}

RunResult payload_to_result(const ResultPayload& p) {
  RunResult r;
  r.exit.tag = static_cast<ExitKindTag>(p.exit_kind);
  r.exit.reason = static_cast<CrashReasonTag>(p.crash_reason);
  r.exit.value = p.exit_value;
  r.instructions = p.instructions;
  r.exec_us = p.exec_us;
  r.coverage = p.coverage;
  return r;
}

int run_vp_server(int in_fd, int out_fd) {
  std::vector<uint8_t> rxbuf;
  std::unique_ptr<EmbeddedVp> vp;

  auto send = [&](const Frame& f) {
    auto bytes = encode_frame(f);
    return write_all(out_fd, bytes.data(), bytes.size());
  };
  auto send_error = [&](const std::string& msg) {
    send({MsgType::Error, std::vector<uint8_t>(msg.begin(), msg.end())});
  };

  if (!send({MsgType::Ready, {}})) return 1;

  for (;;) {
    DecodeOutcome d = decode_frame(rxbuf);
    if (d.status == DecodeStatus::Error) {
      send_error("bad frame at offset " + std::to_string(d.error_offset) +
                 ": " + d.message);
      return 1;
    }
    if (d.status == DecodeStatus::NeedMore) {
      uint8_t tmp[65536];
      ssize_t n = ::read(in_fd, tmp, sizeof(tmp));
      if (n <= 0) return 1;  // harness went away
      rxbuf.insert(rxbuf.end(), tmp, tmp + n);
      continue;
    }
    rxbuf.erase(rxbuf.begin(), rxbuf.begin() + static_cast<long>(d.consumed));

    switch (d.frame.type) {
      case MsgType::Configure: {
        try {
          std::string text(d.frame.payload.begin(), d.frame.payload.end());
          VpConfig cfg = parse_config_text(text);
          if (!cfg.image_path.empty())
            cfg.image_bytes = read_file_bytes(cfg.image_path);
          vp = std::make_unique<EmbeddedVp>(cfg);
        } catch (const std::exception& e) {
          send_error(e.what());
          return 1;
        }
        if (!send({MsgType::Ready, {}})) return 1;
        break;
      }
      case MsgType::Run: {
        if (!vp) {
          send_error("RUN before CONFIGURE");
          return 1;
        }
        RunResult r = vp->run_case(d.frame.payload);
        if (!send({MsgType::Result, encode_result(result_to_payload(r))}))
          return 1;
        break;
      }
      case MsgType::Shutdown:
        return 0;
      default:
        send_error("unexpected message type");
        return 1;
    }
  }
}

// ---------------------------------------------------------------------------

CaseRunner::CaseRunner(VpConfig cfg, ExecMode mode, std::string vp_binary)
    : cfg_(std::move(cfg)), mode_(mode), binary_(std::move(vp_binary)) {
  if (mode_ == ExecMode::Restart && binary_.empty())
    binary_ = default_vp_binary();
}

RunResult CaseRunner::run(std::span<const uint8_t> input) {
  if (mode_ == ExecMode::Restart) {
    ProcessVp vp(cfg_, binary_);
    spawn_count_++;
    RunResult r = vp.run_case(input);
    StageTimings t = vp.timings;
    t.exec_ms = static_cast<double>(r.exec_us) / 1000.0;
    spawn_log_.push_back(t);
    vp.shutdown();
    return r;
  }

  if (!embedded_) {
    embedded_ = std::make_unique<EmbeddedVp>(cfg_);
    spawn_count_++;
    spawn_log_.push_back(embedded_->timings);
  }
  RunResult r = embedded_->run_case(input);
  if (r.exit.tag == ExitKindTag::Crash) embedded_.reset();
  return r;
}

}  // namespace vpfuzz
