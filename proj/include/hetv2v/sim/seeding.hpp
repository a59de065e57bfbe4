#pragma once

#include <cstdint>
#include <initializer_list>

namespace hetv2v {

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for a (base, labels...) tuple.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base,
                                                  std::initializer_list<std::uint64_t> labels) {
  std::uint64_t s = mix64(base);
  for (const auto l : labels) s = mix64(s ^ l);
  return s;
}

}  // namespace hetv2v
