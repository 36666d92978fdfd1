#include "vpfuzz/probe.hpp"

#include "vpfuzz/bus.hpp"

namespace vpfuzz {

ProbeReadStatus probe_read(uint32_t /*addr*/, uint32_t size, InputCursor& cursor,
                           ExhaustionPolicy policy, uint32_t& value) {
  if (cursor.remaining() < size && policy == ExhaustionPolicy::EndRun)
    return ProbeReadStatus::Exhausted;
  uint32_t v = 0;
  for (uint32_t i = 0; i < size; i++) {
    uint8_t b = 0;
    if (cursor.offset < cursor.input.size()) b = cursor.input[cursor.offset++];
    v |= static_cast<uint32_t>(b) << (8 * i);
  }
  cursor.reads_served++;
  value = v;
  return ProbeReadStatus::Served;
}

const char* fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::BusError: return "bus_error";
    case FaultKind::IllegalInstruction: return "illegal_instruction";
    case FaultKind::MisalignedAccess: return "misaligned_access";
    case FaultKind::StackOverflowGuard: return "stack_overflow_guard";
  }
  return "unknown";
}

BusResponse BusRouter::route(const BusTransaction& txn) {
  // addr + size must not wrap the 32-bit space.
  if (static_cast<uint64_t>(txn.addr) + txn.size > (1ull << 32))
    return BusResponse::faulted(FaultKind::BusError);

  // A transaction belongs to the probe when its first byte lies in a
  // tracked range.
  if (probe_ && probe_->tracks(txn.addr)) {
    if (txn.dir == BusDir::Read) {
      uint32_t v = 0;
      if (probe_->config().write_policy == WritePolicy::StoreToShadow &&
          probe_->shadow_load(txn.addr, txn.size, v)) {
        shadow_reads++;
        return BusResponse::ok(v);
      }
      auto st = probe_read(txn.addr, txn.size, probe_->cursor(),
                           probe_->config().exhaustion, v);
      if (st == ProbeReadStatus::Exhausted) return BusResponse::exhausted();
      probe_reads++;
      probe_->emit_trace({txn.origin_pc, txn.addr, txn.size, v});
      return BusResponse::ok(v);
    }
    if (probe_->config().write_policy == WritePolicy::StoreToShadow) {
      probe_->shadow_store(txn.addr, txn.size, txn.data);
      shadow_writes++;
    } else {
      discarded_writes++;
    }
    return BusResponse::ok(0);
  }

  switch (mem_->classify(txn.addr, txn.size)) {
    case GuestMemory::Access::Guard:
      return BusResponse::faulted(FaultKind::StackOverflowGuard);
    case GuestMemory::Access::Out:
      return BusResponse::faulted(FaultKind::BusError);
    case GuestMemory::Access::Ok:
      break;
  }
  if (txn.dir == BusDir::Read) {
    mem_reads++;
    return BusResponse::ok(mem_->read(txn.addr, txn.size));
  }
  mem_->write(txn.addr, txn.size, txn.data);
  mem_writes++;
  return BusResponse::ok(0);
}

}  // namespace vpfuzz
