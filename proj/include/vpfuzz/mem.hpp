#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace vpfuzz {

inline constexpr uint32_t kDefaultRamBase = 0x00001000;
inline constexpr uint32_t kDefaultRamSize = 1u << 20;
inline constexpr uint32_t kGuardPageSize = 4096;

// Flat little-endian physical memory with a guard page directly above the
// top of RAM. The stack sits at the top, so anything marching past it lands
// in the guard and is reported as a distinct fault class.
//
// Writes mark 4 KiB pages dirty so a reset-point restore only copies what
// an execution actually touched.
class GuestMemory {
 public:
  enum class Access { Ok, Guard, Out };
  static constexpr uint32_t kPageShift = 12;

  GuestMemory(uint32_t base = kDefaultRamBase, uint32_t size = kDefaultRamSize)
      : base_(base),
        bytes_(size, 0),
        dirty_((size / (1u << kPageShift) + 64) / 64, 0) {}

  uint32_t base() const { return base_; }
  uint32_t size() const { return static_cast<uint32_t>(bytes_.size()); }

  Access classify(uint32_t addr, uint32_t len) const {
    uint64_t end = static_cast<uint64_t>(addr) + len;
    uint64_t ram_end = static_cast<uint64_t>(base_) + bytes_.size();
    if (addr >= base_ && end <= ram_end) return Access::Ok;
    if (addr >= ram_end && end <= ram_end + kGuardPageSize) return Access::Guard;
    // Straddling the guard boundary counts as a guard hit.
    if (addr < ram_end + kGuardPageSize && end > ram_end) return Access::Guard;
    return Access::Out;
  }

  // len in {1,2,4}; caller must have classified the access as Ok.
  uint32_t read(uint32_t addr, uint32_t len) const {
    uint32_t v = 0;
    for (uint32_t i = 0; i < len; i++)
      v |= static_cast<uint32_t>(bytes_[addr - base_ + i]) << (8 * i);
    return v;
  }

  void write(uint32_t addr, uint32_t len, uint32_t value) {
    uint32_t off = addr - base_;
    // Aligned accesses of len <= 4 never straddle a page.
    uint32_t page = off >> kPageShift;
    dirty_[page >> 6] |= 1ull << (page & 63);
    uint32_t last = (off + len - 1) >> kPageShift;
    dirty_[last >> 6] |= 1ull << (last & 63);
    for (uint32_t i = 0; i < len; i++)
      bytes_[off + i] = static_cast<uint8_t>(value >> (8 * i));
  }

  std::span<const uint8_t> bytes() const { return bytes_; }
  std::vector<uint8_t> snapshot_bytes() const { return bytes_; }
  void restore_bytes(const std::vector<uint8_t>& saved) {
    bytes_ = saved;
    clear_dirty();
  }

  // Pages written since the last clear_dirty(). Restoring only those is
  // valid only against the byte image that was current at that clear.
  void clear_dirty() { std::fill(dirty_.begin(), dirty_.end(), 0); }
  void restore_dirty_from(const std::vector<uint8_t>& saved) {
    constexpr uint32_t page_bytes = 1u << kPageShift;
    for (size_t w = 0; w < dirty_.size(); w++) {
      uint64_t bits = dirty_[w];
      while (bits) {
        uint32_t bit = static_cast<uint32_t>(__builtin_ctzll(bits));
        bits &= bits - 1;
        size_t start = (w * 64 + bit) * page_bytes;
        size_t n = std::min<size_t>(page_bytes, bytes_.size() - start);
        std::copy(saved.begin() + static_cast<long>(start),
                  saved.begin() + static_cast<long>(start + n),
                  bytes_.begin() + static_cast<long>(start));
      }
      dirty_[w] = 0;
    }
  }

  void clear() {
    bytes_.assign(bytes_.size(), 0);
    std::fill(dirty_.begin(), dirty_.end(), ~0ull);
  }

 private:
  uint32_t base_;
  std::vector<uint8_t> bytes_;
  std::vector<uint64_t> dirty_;
};

// Copies the image verbatim; everything else stays zero. Throws ConfigError
// when the image does not fit.
void load_image(GuestMemory& mem, std::span<const uint8_t> image,
                uint32_t load_addr);

}  // namespace vpfuzz
