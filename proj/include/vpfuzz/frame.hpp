#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vpfuzz/coverage.hpp"

namespace vpfuzz {

// Wire format: 1-byte message type, 4-byte little-endian payload length,
// payload. Applies both directions of the harness<->VP channel.
enum class MsgType : uint8_t {
  Configure = 0x01,  // payload: config file text
  Ready = 0x02,      // empty
  Run = 0x03,        // payload: test-case bytes
  Result = 0x04,     // payload: fixed layout, see ResultPayload
  Shutdown = 0x05,   // empty
  Error = 0x06,      // payload: utf-8 diagnostic
};

inline constexpr uint32_t kMaxFramePayload = 16u << 20;
inline constexpr size_t kFrameHeaderSize = 5;

struct Frame {
  MsgType type = MsgType::Ready;
  std::vector<uint8_t> payload;

  bool operator==(const Frame&) const = default;
};

std::vector<uint8_t> encode_frame(const Frame& frame);

enum class DecodeStatus : uint8_t { Ok, NeedMore, Error };

struct DecodeOutcome {
  DecodeStatus status = DecodeStatus::NeedMore;
  Frame frame;
  size_t consumed = 0;      // bytes consumed on Ok
  size_t error_offset = 0;  // offset of the violating byte on Error
  std::string message;
};

// Decodes one frame from the front of the buffer. A partial frame yields
// NeedMore, never corruption; malformed input reports a deterministic
// offset.
DecodeOutcome decode_frame(std::span<const uint8_t> buf);

// RESULT payload: exit_kind(1) crash_reason(1) exit_value(4) instructions(8)
// exec_us(8) coverage(65536), all little-endian.
struct ResultPayload {
  uint8_t exit_kind = 0;
  uint8_t crash_reason = 0;
  uint32_t exit_value = 0;
  uint64_t instructions = 0;
  uint64_t exec_us = 0;
  std::vector<uint8_t> coverage;  // kCoverageMapSize bytes

  bool operator==(const ResultPayload&) const = default;
};

inline constexpr size_t kResultPayloadSize = 1 + 1 + 4 + 8 + 8 + kCoverageMapSize;

std::vector<uint8_t> encode_result(const ResultPayload& r);
bool decode_result(std::span<const uint8_t> payload, ResultPayload& out);

}  // namespace vpfuzz
