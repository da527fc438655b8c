#include "fruitbench/rng.hpp"

namespace fruitbench {

std::uint64_t CounterRng::mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::stream_key(std::uint64_t seed, std::int64_t category,
                                     std::uint64_t purpose) noexcept {
  return mix64(mix64(seed ^ purpose) +
               kGamma * static_cast<std::uint64_t>(category));
}

std::uint64_t CounterRng::bounded(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = next();
    if (x >= threshold) return x % bound;
  }
}

}  // namespace fruitbench
