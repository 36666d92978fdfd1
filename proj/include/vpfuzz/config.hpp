#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vpfuzz/mem.hpp"
#include "vpfuzz/probe.hpp"
#include "vpfuzz/sim.hpp"

namespace vpfuzz {

enum class CrashMode : uint8_t { ReturnRegister, ErrorHandler };

struct PersistentRange {
  uint32_t entry_pc = 0;
  uint32_t exit_pc = 0;
  // Literal jump-to-entry between runs instead of restoring the snapshot.
  // State then leaks across test cases; off by default.
  bool jump_only = false;

  bool operator==(const PersistentRange&) const = default;
};

// Full VP configuration as read from a config file. RAM geometry is fixed
// (1 MiB at kDefaultRamBase); everything else is explicit.
struct VpConfig {
  std::string image_path;
  uint32_t load_addr = kDefaultRamBase;
  uint32_t entry_pc = kDefaultRamBase;
  uint32_t stack_top = kDefaultRamBase + kDefaultRamSize;

  std::vector<AddressRange> tracked;
  ExhaustionPolicy exhaustion = ExhaustionPolicy::EndRun;
  WritePolicy write_policy = WritePolicy::Discard;

  CrashMode crash_mode = CrashMode::ReturnRegister;
  uint32_t main_return_pc = 0;  // ReturnRegister mode
  uint32_t handler_pc = 0;      // ErrorHandler mode

  std::optional<PersistentRange> persistent;

  uint64_t max_instructions = kDefaultMaxInstructions;
  uint32_t timeout_ms = 2000;
  std::string seed_dir;
  std::string out_dir;
  uint64_t rng_seed = 1;

  // In-memory image override used by tests and the bundled-guest path;
  // never serialized.
  std::vector<uint8_t> image_bytes;

  bool operator==(const VpConfig&) const = default;
};

// Parses the sectioned key=value format. Unknown sections or keys are hard
// errors carrying a line number; addresses require a 0x prefix.
VpConfig parse_config_text(const std::string& text);
VpConfig load_config_file(const std::string& path);

// Canonical serialization; parse(serialize(parse(t))) == parse(t).
std::string serialize_config(const VpConfig& cfg);

// Cross-field validation shared by every entry point (address fit, range
// disjointness, crash-mode addresses, persistent entry != exit).
void validate_config(const VpConfig& cfg);

// CLI process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCrash = 1;
inline constexpr int kExitAbnormal = 2;  // timeout / input exhausted
inline constexpr int kExitConfigError = 3;

}  // namespace vpfuzz
