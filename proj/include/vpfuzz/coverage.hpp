#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace vpfuzz {

// Map size is a campaign-wide constant; indices from differently sized maps
// must never be mixed.
inline constexpr size_t kCoverageMapSize = 1u << 16;

// 32 -> 16 bit mix used for edge indices: multiply by the golden-ratio
// constant, keep the top half.
inline uint16_t coverage_hash16(uint32_t block_addr) {
  return static_cast<uint16_t>((block_addr * 0x9E3779B1u) >> 16);
}

// Edge-hit bitmap filled by the simulator while a test case runs. prev_loc
// is execution-scoped and reset together with the counters.
struct CoverageMap {
  std::vector<uint8_t> bytes;
  uint16_t prev_loc = 0;

  CoverageMap() : bytes(kCoverageMapSize, 0) {}

  void reset() {
    bytes.assign(kCoverageMapSize, 0);
    prev_loc = 0;
  }

  // Call once per executed basic-block entry (taken branch/jump targets plus
  // the entry point of the run).
  void record_edge(uint32_t block_addr) {
    uint16_t cur = coverage_hash16(block_addr);
    uint8_t& slot = bytes[static_cast<uint16_t>(cur ^ prev_loc)];
    if (slot != 0xff) slot++;
    prev_loc = cur >> 1;
  }

  size_t nonzero_bytes() const {
    size_t n = 0;
    for (uint8_t b : bytes) n += b != 0;
    return n;
  }
};

// Replaces raw hit counts with AFL-style bucket masks:
// 0->0, 1->bit0, 2->bit1, 3->bit2, 4..7->bit3, 8..15->bit4, 16..31->bit5,
// 32..127->bit6, 128..255->bit7.
CoverageMap classify_counts(const CoverageMap& map);

enum class NewBits { Nothing, NewCounts, NewEdges };

// Both maps must be classified. Merges local into global when anything new
// is seen and reports the strongest novelty found.
NewBits has_new_bits(CoverageMap& global, const CoverageMap& local);

// 64-bit digest of a classified map, used for queue/crash identity.
uint64_t coverage_digest(const CoverageMap& classified_map);

// Debug helper: indices of nonzero bytes.
std::vector<uint32_t> nonzero_indices(const CoverageMap& map);

}  // namespace vpfuzz
