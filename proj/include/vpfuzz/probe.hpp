#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace vpfuzz {

// Inclusive address range tracked by the probe.
struct AddressRange {
  uint32_t start = 0;
  uint32_t end = 0;

  bool contains(uint32_t addr) const { return addr >= start && addr <= end; }
  bool operator==(const AddressRange&) const = default;
};

// What happens when a tracked read asks for more bytes than the test case
// still has. EndRun terminates the execution as a normal non-crash end;
// ZeroFill pads with 0x00 and pins the cursor at the end of the input.
enum class ExhaustionPolicy : uint8_t { EndRun, ZeroFill };

// What happens to writes landing in a tracked range.
enum class WritePolicy : uint8_t { Discard, StoreToShadow };

struct ProbeConfig {
  std::vector<AddressRange> tracked;
  ExhaustionPolicy exhaustion = ExhaustionPolicy::EndRun;
  WritePolicy write_policy = WritePolicy::Discard;
};

// Position in the current test case. Reads consume from this single flat
// stream in access order, whichever tracked range they hit.
struct InputCursor {
  std::vector<uint8_t> input;
  size_t offset = 0;
  uint64_t reads_served = 0;

  size_t remaining() const { return input.size() - offset; }
};

enum class ProbeReadStatus : uint8_t { Served, Exhausted };

// Consumes exactly `size` bytes, little-endian assembled. Under ZeroFill the
// read always succeeds, padding missing bytes with zeros. Under EndRun an
// underfull read consumes nothing and reports Exhausted.
ProbeReadStatus probe_read(uint32_t addr, uint32_t size, InputCursor& cursor,
                           ExhaustionPolicy policy, uint32_t& value);

// One intercepted read, as reported in trace mode.
struct ProbeEvent {
  uint32_t pc = 0;
  uint32_t addr = 0;
  uint32_t size = 0;
  uint32_t value = 0;
};

class ProbeState {
 public:
  explicit ProbeState(ProbeConfig config = {}) : config_(std::move(config)) {}

  const ProbeConfig& config() const { return config_; }
  InputCursor& cursor() { return cursor_; }
  const InputCursor& cursor() const { return cursor_; }

  bool tracks(uint32_t addr) const {
    for (const auto& r : config_.tracked)
      if (r.contains(addr)) return true;
    return false;
  }

  // Re-arms the probe for a new test case. Shadow contents do not survive
  // across runs.
  void arm(std::span<const uint8_t> input) {
    cursor_.input.assign(input.begin(), input.end());
    cursor_.offset = 0;
    cursor_.reads_served = 0;
    shadow_.clear();
  }

  void shadow_store(uint32_t addr, uint32_t size, uint32_t value) {
    for (uint32_t i = 0; i < size; i++)
      shadow_[addr + i] = static_cast<uint8_t>(value >> (8 * i));
  }

  // A read is shadow-backed only when every byte of the access was written
  // before; partial hits fall through to the input stream.
  bool shadow_load(uint32_t addr, uint32_t size, uint32_t& value) const {
    uint32_t v = 0;
    for (uint32_t i = 0; i < size; i++) {
      auto it = shadow_.find(addr + i);
      if (it == shadow_.end()) return false;
      v |= static_cast<uint32_t>(it->second) << (8 * i);
    }
    value = v;
    return true;
  }

  void set_trace(std::function<void(const ProbeEvent&)> fn) {
    trace_ = std::move(fn);
  }
  void emit_trace(const ProbeEvent& ev) const {
    if (trace_) trace_(ev);
  }

 private:
  ProbeConfig config_;
  InputCursor cursor_;
  std::unordered_map<uint32_t, uint8_t> shadow_;
  std::function<void(const ProbeEvent&)> trace_;
};

}  // namespace vpfuzz
