#pragma once
// Counter-based random streams.
//
// Every simulation task gets its own stream keyed by the task coordinates, so
// results do not depend on scheduling or on the number of worker threads.

#include <cstdint>
#include <limits>

namespace cascade_limits {

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// The i-th output of the SplitMix64 sequence started at `key`. Random access,
// so it doubles as a keyed hash of the index.
constexpr std::uint64_t keyed_word(std::uint64_t key, std::uint64_t index) noexcept {
  return mix64(key + (index + 1) * kGolden);
}

// Top 53 bits mapped to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// A reproducible stream: output n is keyed_word(key, n). Satisfies
// UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterStream(std::uint64_t key = 0) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return keyed_word(key_, counter_++); }

  constexpr double uniform() noexcept { return to_unit((*this)()); }

  // Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t bound) noexcept;

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Reserved index values for streams that are not tied to a replicate.
inline constexpr std::uint64_t kNoIndex = std::numeric_limits<std::uint64_t>::max();

// Stream for one (seed, R0 point, replicate) task of an experiment.
CounterStream derive_stream(std::uint64_t experiment_seed, std::uint64_t seed_index,
                            std::uint64_t r0_index, std::uint64_t replicate) noexcept;

}  // namespace cascade_limits
