#pragma once

#include <cstdint>

#include "vpfuzz/mem.hpp"
#include "vpfuzz/probe.hpp"

namespace vpfuzz {

enum class FaultKind : uint8_t {
  BusError = 0,
  IllegalInstruction = 1,
  MisalignedAccess = 2,
  StackOverflowGuard = 3,
};

const char* fault_kind_name(FaultKind k);

enum class BusDir : uint8_t { Read, Write };

// One guest memory access. data carries up to `size` little-endian bytes.
struct BusTransaction {
  uint32_t addr = 0;
  uint32_t size = 0;  // 1, 2 or 4
  BusDir dir = BusDir::Read;
  uint32_t data = 0;
  uint32_t origin_pc = 0;
};

enum class BusStatus : uint8_t { Ok, Fault, InputExhausted };

struct BusResponse {
  BusStatus status = BusStatus::Ok;
  uint32_t data = 0;
  FaultKind fault = FaultKind::BusError;

  static BusResponse ok(uint32_t v) { return {BusStatus::Ok, v, FaultKind::BusError}; }
  static BusResponse faulted(FaultKind k) { return {BusStatus::Fault, 0, k}; }
  static BusResponse exhausted() {
    return {BusStatus::InputExhausted, 0, FaultKind::BusError};
  }
};

// Dispatches transactions between the probe and plain memory. Exactly one
// consumer handles each transaction; the hit counters make that checkable.
class BusRouter {
 public:
  BusRouter(GuestMemory& mem, ProbeState* probe) : mem_(&mem), probe_(probe) {}

  BusResponse route(const BusTransaction& txn);

  // Per-consumer accounting, reset per run via reset_counters().
  uint64_t probe_reads = 0;      // reads served from the input stream
  uint64_t shadow_reads = 0;     // reads served from the write shadow
  uint64_t mem_reads = 0;
  uint64_t mem_writes = 0;
  uint64_t discarded_writes = 0;
  uint64_t shadow_writes = 0;

  void reset_counters() {
    probe_reads = shadow_reads = mem_reads = mem_writes = 0;
    discarded_writes = shadow_writes = 0;
  }

  GuestMemory& memory() { return *mem_; }
  ProbeState* probe() { return probe_; }

 private:
  GuestMemory* mem_;
  ProbeState* probe_;
};

}  // namespace vpfuzz
