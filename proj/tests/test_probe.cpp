#include <doctest.h>

#include <random>

#include "vpfuzz/bus.hpp"

using namespace vpfuzz;

namespace {

InputCursor cursor_of(std::vector<uint8_t> bytes) {
  InputCursor c;
  c.input = std::move(bytes);
  return c;
}

// Pad-then-assemble reference for ZeroFill reads.
uint32_t oracle_zero_fill(const std::vector<uint8_t>& input, size_t offset,
                          uint32_t size) {
  uint32_t v = 0;
  for (uint32_t i = 0; i < size; i++) {
    uint8_t b = offset + i < input.size() ? input[offset + i] : 0x00;
    v |= static_cast<uint32_t>(b) << (8 * i);
  }
  return v;
}

struct Rig {
  GuestMemory mem;
  ProbeState probe;
  BusRouter bus;

  explicit Rig(ProbeConfig cfg = {})
      : mem(), probe(std::move(cfg)), bus(mem, &probe) {}
};

ProbeConfig uart_cfg(ExhaustionPolicy ex = ExhaustionPolicy::EndRun,
                     WritePolicy wp = WritePolicy::Discard) {
  ProbeConfig cfg;
  cfg.tracked = {{0x40002000, 0x400020ff}};
  cfg.exhaustion = ex;
  cfg.write_policy = wp;
  return cfg;
}

}  // namespace

TEST_CASE("probe_read: single byte consume") {
  InputCursor c = cursor_of({0x41});
  uint32_t v = 0;
  CHECK(probe_read(0x40002000, 1, c, ExhaustionPolicy::EndRun, v) ==
        ProbeReadStatus::Served);
  CHECK(v == 0x41);
  CHECK(c.offset == 1);
  CHECK(c.reads_served == 1);
}

TEST_CASE("probe_read: little-endian assembly of four bytes") {
  InputCursor c = cursor_of({0x01, 0x02, 0x03, 0x04});
  uint32_t v = 0;
  CHECK(probe_read(0x40002000, 4, c, ExhaustionPolicy::EndRun, v) ==
        ProbeReadStatus::Served);
  CHECK(v == 0x04030201);
  CHECK(c.offset == 4);
}

TEST_CASE("probe_read: ZeroFill pads and pins the cursor") {
  std::vector<uint8_t> input = {0xFF};
  InputCursor c = cursor_of(input);
  uint32_t v = 0;
  CHECK(probe_read(0x40002000, 2, c, ExhaustionPolicy::ZeroFill, v) ==
        ProbeReadStatus::Served);
  CHECK(v == oracle_zero_fill(input, 0, 2));
  CHECK(v == 0x00FF);
  CHECK(c.offset == 1);  // pinned at end of input
  CHECK(c.reads_served == 1);
}

TEST_CASE("probe_read: EndRun underflow consumes nothing") {
  InputCursor c = cursor_of({0xFF});
  uint32_t v = 0;
  CHECK(probe_read(0x40002000, 2, c, ExhaustionPolicy::EndRun, v) ==
        ProbeReadStatus::Exhausted);
  CHECK(c.offset == 0);
  CHECK(c.reads_served == 0);
}

TEST_CASE("route: untracked read passes through to memory") {
  Rig rig(uart_cfg());
  rig.mem.write(0x2000, 4, 0xDEADBEEF);
  BusResponse r = rig.bus.route({0x2000, 4, BusDir::Read, 0, 0});
  CHECK(r.status == BusStatus::Ok);
  CHECK(r.data == 0xDEADBEEF);
  CHECK(rig.bus.mem_reads == 1);
  CHECK(rig.bus.probe_reads == 0);
}

TEST_CASE("route: tracked read serves the next input byte") {
  Rig rig(uart_cfg());
  rig.probe.arm(std::vector<uint8_t>{'h', 'e', 'l', 'l', 'o', '\n'});
  BusResponse r = rig.bus.route({0x40002000, 1, BusDir::Read, 0, 0});
  CHECK(r.status == BusStatus::Ok);
  CHECK(r.data == 0x68);
  CHECK(rig.probe.cursor().offset == 1);
}

TEST_CASE("route: tracked write with Discard leaves memory alone") {
  Rig rig(uart_cfg());
  BusResponse r = rig.bus.route({0x40002000, 4, BusDir::Write, 0x12345678, 0});
  CHECK(r.status == BusStatus::Ok);
  CHECK(rig.bus.discarded_writes == 1);
  // Tracked reads still come from the (empty) stream, not from the write.
  BusResponse rd = rig.bus.route({0x40002000, 4, BusDir::Read, 0, 0});
  CHECK(rd.status == BusStatus::InputExhausted);
}

TEST_CASE("route: StoreToShadow lets the guest read back what it wrote") {
  Rig rig(uart_cfg(ExhaustionPolicy::EndRun, WritePolicy::StoreToShadow));
  rig.probe.arm(std::vector<uint8_t>{0xAA});
  CHECK(rig.bus.route({0x40002010, 4, BusDir::Write, 0xCAFEBABE, 0}).status ==
        BusStatus::Ok);
  BusResponse rd = rig.bus.route({0x40002010, 4, BusDir::Read, 0, 0});
  CHECK(rd.status == BusStatus::Ok);
  CHECK(rd.data == 0xCAFEBABE);
  CHECK(rig.bus.shadow_reads == 1);
  // The input stream was not consumed by the shadow-backed read.
  CHECK(rig.probe.cursor().offset == 0);
  // An unwritten tracked address still consumes from the stream.
  BusResponse rd2 = rig.bus.route({0x40002020, 1, BusDir::Read, 0, 0});
  CHECK(rd2.data == 0xAA);
  CHECK(rig.probe.cursor().offset == 1);
}

TEST_CASE("route: unmapped untracked address faults") {
  Rig rig(uart_cfg());
  BusResponse r = rig.bus.route({0xF0000000, 4, BusDir::Read, 0, 0});
  CHECK(r.status == BusStatus::Fault);
  CHECK(r.fault == FaultKind::BusError);
}

TEST_CASE("conservation: served sizes sum to the final offset under EndRun") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; trial++) {
    Rig rig(uart_cfg());
    std::vector<uint8_t> input(rng() % 64);
    for (auto& b : input) b = static_cast<uint8_t>(rng());
    rig.probe.arm(input);

    uint64_t served_bytes = 0;
    for (int t = 0; t < 50; t++) {
      uint32_t sizes[] = {1, 2, 4};
      uint32_t size = sizes[rng() % 3];
      uint32_t addr = 0x40002000 + (rng() % 16) * 4;
      BusResponse r = rig.bus.route({addr, size, BusDir::Read, 0, 0});
      if (r.status == BusStatus::Ok) served_bytes += size;
      if (r.status == BusStatus::InputExhausted) break;
    }
    CHECK(served_bytes == rig.probe.cursor().offset);
    uint64_t expect_reads = rig.bus.probe_reads;
    CHECK(rig.probe.cursor().reads_served == expect_reads);
  }
}

TEST_CASE("interception completeness: tracked reads never reach memory") {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 1000; trial++) {
    Rig rig(uart_cfg(ExhaustionPolicy::ZeroFill));
    std::vector<uint8_t> input(16);
    for (auto& b : input) b = static_cast<uint8_t>(rng());
    rig.probe.arm(input);

    uint64_t tracked_reads = 0, untracked_reads = 0, writes = 0;
    for (int t = 0; t < 40; t++) {
      bool tracked = rng() % 2;
      bool read = rng() % 2;
      uint32_t addr = tracked ? 0x40002000 + rng() % 0x100
                              : 0x2000 + (rng() % 0x100) * 4;
      uint32_t size = 1;  // byte ops cannot misalign
      BusTransaction txn{addr, size, read ? BusDir::Read : BusDir::Write,
                         static_cast<uint32_t>(rng()), 0};
      rig.bus.route(txn);
      if (read && tracked) tracked_reads++;
      if (read && !tracked) untracked_reads++;
      if (!read) writes++;
    }
    CHECK(rig.bus.probe_reads + rig.bus.shadow_reads == tracked_reads);
    CHECK(rig.bus.mem_reads == untracked_reads);
    CHECK(rig.bus.mem_writes + rig.bus.discarded_writes +
              rig.bus.shadow_writes == writes);
  }
}

TEST_CASE("pass-through transparency: empty tracked list behaves like memory") {
  std::mt19937 rng(8);
  Rig rig{ProbeConfig{}};  // no tracked ranges
  GuestMemory direct;
  for (int t = 0; t < 2000; t++) {
    uint32_t sizes[] = {1, 2, 4};
    uint32_t size = sizes[rng() % 3];
    uint32_t addr;
    if (rng() % 8 == 0)
      addr = 0xF0000000 + rng() % 64;  // unmapped
    else
      addr = kDefaultRamBase + (rng() % 0x1000) * 4;
    bool read = rng() % 2;
    uint32_t data = rng();

    BusResponse via_router =
        rig.bus.route({addr, size, read ? BusDir::Read : BusDir::Write, data, 0});

    // Direct memory reference.
    BusResponse directly;
    if (direct.classify(addr, size) != GuestMemory::Access::Ok) {
      directly = BusResponse::faulted(direct.classify(addr, size) ==
                                              GuestMemory::Access::Guard
                                          ? FaultKind::StackOverflowGuard
                                          : FaultKind::BusError);
    } else if (read) {
      directly = BusResponse::ok(direct.read(addr, size));
    } else {
      direct.write(addr, size, data);
      directly = BusResponse::ok(0);
    }

    CHECK(via_router.status == directly.status);
    CHECK(via_router.data == directly.data);
    if (via_router.status == BusStatus::Fault)
      CHECK(via_router.fault == directly.fault);
  }
}

TEST_CASE("replay: identical input yields an identical event sequence") {
  auto run_events = [] {
    Rig rig(uart_cfg());
    std::vector<ProbeEvent> events;
    rig.probe.set_trace([&](const ProbeEvent& e) { events.push_back(e); });
    rig.probe.arm(std::vector<uint8_t>{1, 2, 3, 4, 5, 6, 7, 8});
    std::mt19937 rng(12);
    for (int t = 0; t < 10; t++) {
      uint32_t addr = 0x40002000 + rng() % 8;
      rig.bus.route({addr, 1, BusDir::Read, 0, 0x1000 + 4u * t});
    }
    return events;
  };
  auto a = run_events();
  auto b = run_events();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); i++) {
    CHECK(a[i].addr == b[i].addr);
    CHECK(a[i].size == b[i].size);
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].pc == b[i].pc);
  }
}
