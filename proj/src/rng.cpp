#include "cascade_limits/rng.hpp"

namespace cascade_limits {

std::uint64_t CounterStream::below(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

CounterStream derive_stream(std::uint64_t experiment_seed, std::uint64_t seed_index,
                            std::uint64_t r0_index, std::uint64_t replicate) noexcept {
  // Chained absorption; each step is a bijection of the running state, so keys
  // differing in a single coordinate always give different stream keys.
  std::uint64_t h = mix64(experiment_seed ^ 0x6a09e667f3bcc908ULL);
  h = mix64(h ^ mix64(seed_index + 0x3c6ef372fe94f82bULL));
  h = mix64(h ^ mix64(r0_index + 0xa54ff53a5f1d36f1ULL));
  h = mix64(h ^ mix64(replicate + 0x510e527fade682d1ULL));
  return CounterStream(h);
}

}  // namespace cascade_limits
