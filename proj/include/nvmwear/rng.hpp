#pragma once

#include <cstdint>
#include <random>

namespace nvmwear {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Named substreams so each component draws from its own sequence.
enum class Stream : std::uint64_t {
  engine = 1,
  workload = 2,
  directory = 3,
  exchange = 4,
  randomizer = 5,
};

/// mt19937_64 with bounded sampling done here rather than through
/// std::uniform_int_distribution, whose algorithm is implementation-defined.
/// Streams are therefore identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, Stream stream) {
    return Rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). Rejection sampling on the top of the range.
  std::uint64_t uniform(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > limit);
    return x % n;
  }

  /// Uniform in [0, 1) with 53 bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nvmwear
