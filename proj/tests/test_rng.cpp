#include <doctest.h>

#include <cmath>
#include <unordered_set>

#include "cascade_limits/rng.hpp"

using namespace cascade_limits;

TEST_CASE("identical keys give identical streams") {
  CounterStream a = derive_stream(42, 3, 7, 11);
  CounterStream b = derive_stream(42, 3, 7, 11);
  for (int i = 0; i < 10000; ++i) REQUIRE(a() == b());
}

TEST_CASE("neighbouring stream keys never share a prefix") {
  // 10^6 pairs differing in exactly one coordinate; first 16 words compared.
  std::size_t identical = 0;
  for (std::uint64_t i = 0; i < 250000; ++i) {
    const std::uint64_t s = i % 1000;
    const std::uint64_t r = i / 1000;
    CounterStream base = derive_stream(9, s, r, 0);
    CounterStream variants[4] = {derive_stream(10, s, r, 0), derive_stream(9, s + 1, r, 0),
                                 derive_stream(9, s, r + 1, 0), derive_stream(9, s, r, 1)};
    std::uint64_t first[16];
    for (auto& w : first) w = base();
    for (auto& v : variants) {
      bool same = true;
      for (auto w : first) same = same && (v() == w);
      identical += same;
    }
  }
  CHECK(identical == 0);
}

TEST_CASE("stream keys are distinct across a sweep-sized index space") {
  std::unordered_set<std::uint64_t> keys;
  for (std::uint64_t s = 0; s < 100; ++s)
    for (std::uint64_t r = 0; r < 10; ++r)
      for (std::uint64_t k = 0; k < 200; ++k) keys.insert(derive_stream(1, s, r, k).key());
  CHECK(keys.size() == 200000);
}

TEST_CASE("uniforms are equidistributed") {
  CounterStream rng = derive_stream(5, 0, 0, 0);
  const int n = 1000000;
  double sum = 0.0;
  int low_half = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    low_half += u < 0.5;
  }
  const double se = std::sqrt(1.0 / 12.0 / n);
  CHECK(std::abs(sum / n - 0.5) < 3 * se);
  CHECK(std::abs(low_half / double(n) - 0.5) < 3 * 0.5 / std::sqrt(double(n)));
}

TEST_CASE("below stays in range and covers it") {
  CounterStream rng(77);
  int counts[7] = {};
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}
