#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vpfuzz/config.hpp"

namespace vpfuzz {

// MMIO address of the single byte-wide UART data register all bundled
// guests read from.
inline constexpr uint32_t kUartDataAddr = 0x40002000;

// Scratch RAM used by the bundled guests (outside the loaded image; RAM is
// zero-initialized so these need no image bytes).
inline constexpr uint32_t kGuestBufAddr = 0x2400;
inline constexpr uint32_t kGuestScratchAddr = 0x2600;
inline constexpr uint32_t kGuestReadCap = 128;

struct GuestBundle {
  std::string name;
  std::vector<uint8_t> binary;
  std::map<std::string, uint32_t> symbols;
  VpConfig config;  // image_bytes filled in; image_path left empty
};

// The UART password target: reads until '\n'/'\0' (capped at 128 unless
// overflow_variant), shifts the read string, compares byte-wise against the
// embedded pre-shifted password and returns 1 on match, 0 otherwise. The
// overflow variant drops the cap and places the buffer near the top of RAM
// so overruns hit the guard page.
GuestBundle build_password_guest(const std::string& password, int shift,
                                 bool overflow_variant = false);

// Same read+shift front end; copies the shifted buffer to scratch RAM and
// exits 0, so tests can compare it against an independent implementation.
GuestBundle build_caesar_debug_guest(int shift);

GuestBundle build_always_crash_guest();  // exits 1 immediately
GuestBundle build_echo_loop_guest();     // reads until the input runs out
GuestBundle build_fault_write_guest();   // stores to an unmapped address on 0x42
GuestBundle build_handler_guest();       // jumps to error_handler on bytes >= 0x80

std::vector<std::string> guest_names();
GuestBundle build_guest_by_name(const std::string& name,
                                const std::string& password, int shift);

// Writes <name>.bin, <name>.sym and <name>.cfg into dir.
void write_bundle(const GuestBundle& bundle, const std::string& dir);

}  // namespace vpfuzz
