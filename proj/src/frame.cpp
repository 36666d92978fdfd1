#include "vpfuzz/frame.hpp"

#include <cstring>

namespace vpfuzz {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; i++) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; i++) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; i++) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}
uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

bool valid_type(uint8_t t) {
  return t >= static_cast<uint8_t>(MsgType::Configure) &&
         t <= static_cast<uint8_t>(MsgType::Error);
}

}  // namespace

std::vector<uint8_t> encode_frame(const Frame& frame) {
  std::vector<uint8_t> out;
  out.reserve(kFrameHeaderSize + frame.payload.size());
  out.push_back(static_cast<uint8_t>(frame.type));
  put_u32(out, static_cast<uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

DecodeOutcome decode_frame(std::span<const uint8_t> buf) {
  DecodeOutcome out;
  if (buf.empty()) return out;  // NeedMore
  if (!valid_type(buf[0])) {
    out.status = DecodeStatus::Error;
    out.error_offset = 0;
    out.message = "unknown message type 0x" + std::to_string(buf[0]);
    return out;
  }
  if (buf.size() < kFrameHeaderSize) return out;  // NeedMore
  uint32_t len = get_u32(buf.data() + 1);
  if (len > kMaxFramePayload) {
    out.status = DecodeStatus::Error;
    out.error_offset = 1;
    out.message = "frame length " + std::to_string(len) + " exceeds limit";
    return out;
  }
  if (buf.size() < kFrameHeaderSize + len) return out;  // NeedMore
  out.status = DecodeStatus::Ok;
  out.frame.type = static_cast<MsgType>(buf[0]);
  out.frame.payload.assign(buf.begin() + kFrameHeaderSize,
                           buf.begin() + kFrameHeaderSize + len);
  out.consumed = kFrameHeaderSize + len;
  return out;
}

std::vector<uint8_t> encode_result(const ResultPayload& r) {
  std::vector<uint8_t> out;
  out.reserve(kResultPayloadSize);
  out.push_back(r.exit_kind);
  out.push_back(r.crash_reason);
  put_u32(out, r.exit_value);
  put_u64(out, r.instructions);
  put_u64(out, r.exec_us);
  out.insert(out.end(), r.coverage.begin(), r.coverage.end());
  return out;
}

bool decode_result(std::span<const uint8_t> payload, ResultPayload& out) {
  if (payload.size() != kResultPayloadSize) return false;
  out.exit_kind = payload[0];
  out.crash_reason = payload[1];
  out.exit_value = get_u32(payload.data() + 2);
  out.instructions = get_u64(payload.data() + 6);
  out.exec_us = get_u64(payload.data() + 14);
  out.coverage.assign(payload.begin() + 22, payload.end());
  return true;
}

}  // namespace vpfuzz
