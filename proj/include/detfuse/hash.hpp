#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace detfuse {

// 64-bit FNV-1a over bytes. Used for config hashes and manifest fingerprints;
// not cryptographic.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return std::string(buf);
}

}  // namespace detfuse
