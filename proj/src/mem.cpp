#include "vpfuzz/mem.hpp"

#include "vpfuzz/util.hpp"

namespace vpfuzz {

void load_image(GuestMemory& mem, std::span<const uint8_t> image,
                uint32_t load_addr) {
  mem.clear();
  if (image.empty()) return;
  uint64_t end = static_cast<uint64_t>(load_addr) + image.size();
  if (load_addr < mem.base() ||
      end > static_cast<uint64_t>(mem.base()) + mem.size())
    throw ConfigError("image does not fit in memory: load_addr=" +
                      hex32(load_addr) + " size=" + std::to_string(image.size()));
  for (size_t i = 0; i < image.size(); i++)
    mem.write(load_addr + static_cast<uint32_t>(i), 1, image[i]);
}

}  // namespace vpfuzz
