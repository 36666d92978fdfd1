#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpfuzz {

// Thrown for anything wrong with user-supplied configuration: bad config
// files, unreadable images, address overlaps. The CLI maps it to status 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Harness/protocol failures (VP died, handshake broke). Campaign-aborting.
struct HarnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline uint64_t fnv1a64(std::span<const uint8_t> data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex32(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}

inline std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Accepts "0x..." hex or plain decimal; the strict=true form rejects
// trailing junk. Throws ConfigError.
inline uint64_t parse_number(const std::string& s) {
  if (s.empty()) throw ConfigError("empty numeric value");
  size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
      v = std::stoull(s.substr(2), &pos, 16), pos += 2;
    else
      v = std::stoull(s, &pos, 10);
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("bad numeric value '" + s + "'");
  return v;
}

inline uint32_t parse_addr(const std::string& s) {
  uint64_t v = parse_number(s);
  if (v > 0xffffffffull) throw ConfigError("address out of 32-bit range: " + s);
  return static_cast<uint32_t>(v);
}

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read file: " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(f),
                              std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::string& path,
                             std::span<const uint8_t> data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write file: " + path);
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
}

inline void write_file_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write file: " + path);
  f << text;
}

inline double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch())
      .count();
}

inline uint64_t unix_ms() {
  using namespace std::chrono;
  return static_cast<uint64_t>(
      duration_cast<milliseconds>(system_clock::now().time_since_epoch())
          .count());
}

}  // namespace vpfuzz
