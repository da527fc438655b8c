#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace fruitbench {

// Counter-based 64-bit generator: value(n) = mix64(key + (n + 1) * kGamma),
// where mix64 is the SplitMix64 finalizer. Output depends only on (key, n),
// which makes every draw reproducible across platforms and implementations.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z) noexcept;

  // Stream key for one (seed, category, purpose) triple:
  //   mix64(mix64(seed ^ purpose) + kGamma * category)
  static std::uint64_t stream_key(std::uint64_t seed, std::int64_t category,
                                  std::uint64_t purpose) noexcept;

  std::uint64_t value_at(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * kGamma);
  }
  std::uint64_t next() noexcept { return value_at(counter_++); }

  // Uniform integer in [0, bound) by rejection: draws below
  // (2^64 - bound) mod bound are discarded, the rest reduced mod bound.
  std::uint64_t bounded(std::uint64_t bound) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fisher-Yates from the back: for i = n-1 .. 1 swap(v[i], v[bounded(i+1)]).
template <typename T>
void pinned_shuffle(std::span<T> values, CounterRng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    using std::swap;
    swap(values[i - 1], values[j]);
  }
}

}  // namespace fruitbench
