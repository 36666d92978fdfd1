#include "vpfuzz/coverage.hpp"

#include <array>
#include <cstring>
#include <stdexcept>

#include "vpfuzz/util.hpp"

namespace vpfuzz {

namespace {

std::array<uint8_t, 256> build_bucket_lut() {
  std::array<uint8_t, 256> lut{};
  lut[0] = 0x00;
  lut[1] = 0x01;
  lut[2] = 0x02;
  lut[3] = 0x04;
  for (int v = 4; v <= 7; v++) lut[v] = 0x08;
  for (int v = 8; v <= 15; v++) lut[v] = 0x10;
  for (int v = 16; v <= 31; v++) lut[v] = 0x20;
  for (int v = 32; v <= 127; v++) lut[v] = 0x40;
  for (int v = 128; v <= 255; v++) lut[v] = 0x80;
  return lut;
}

const std::array<uint8_t, 256> kBucketLut = build_bucket_lut();

}  // namespace

CoverageMap classify_counts(const CoverageMap& map) {
  CoverageMap out;
  for (size_t i = 0; i < kCoverageMapSize; i++)
    out.bytes[i] = kBucketLut[map.bytes[i]];
  return out;
}

NewBits has_new_bits(CoverageMap& global, const CoverageMap& local) {
  if (global.bytes.size() != local.bytes.size())
    throw std::logic_error("coverage map size mismatch");
  NewBits verdict = NewBits::Nothing;
  // Skim eight bytes at a time; most words carry nothing new.
  for (size_t i = 0; i < kCoverageMapSize; i += 8) {
    uint64_t g, l;
    std::memcpy(&g, global.bytes.data() + i, 8);
    std::memcpy(&l, local.bytes.data() + i, 8);
    if ((l & ~g) == 0) continue;
    for (size_t j = i; j < i + 8 && verdict != NewBits::NewEdges; j++) {
      uint8_t gb = global.bytes[j];
      uint8_t lb = local.bytes[j];
      if ((lb & ~gb) == 0) continue;
      verdict = gb == 0 ? NewBits::NewEdges : NewBits::NewCounts;
    }
    if (verdict == NewBits::NewEdges) break;
  }
  if (verdict != NewBits::Nothing) {
    for (size_t i = 0; i < kCoverageMapSize; i++)
      global.bytes[i] |= local.bytes[i];
  }
  return verdict;
}

uint64_t coverage_digest(const CoverageMap& classified_map) {
  return fnv1a64(classified_map.bytes);
}

std::vector<uint32_t> nonzero_indices(const CoverageMap& map) {
  std::vector<uint32_t> out;
  for (uint32_t i = 0; i < kCoverageMapSize; i++)
    if (map.bytes[i] != 0) out.push_back(i);
  return out;
}

}  // namespace vpfuzz
