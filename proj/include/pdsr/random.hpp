#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace pdsr {

/// 64-bit FNV-1a; stable across platforms and runs, unlike std::hash.
constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Engine whose stream depends only on (seed, key, extra...).
inline std::mt19937_64 keyed_engine(std::uint64_t seed, std::string_view key,
                                    std::initializer_list<std::uint64_t> extra = {}) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  const std::uint64_t h = fnv1a64(key);
  std::vector<std::uint32_t> words{lo(seed), hi(seed), lo(h), hi(h)};
  for (std::uint64_t e : extra) {
    words.push_back(lo(e));
    words.push_back(hi(e));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace pdsr
