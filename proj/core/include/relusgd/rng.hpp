#pragma once

#include <cstdint>

// Counter-based random streams.  Every draw is a pure function of
// (seed, stream tag, and up to three counters), so any batch or trial can be
// regenerated in isolation and distinct counters give independent substreams.

namespace relusgd::rng {

// splitmix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Domain-separation tags; one per consumer of random bits.
enum class Stream : std::uint64_t {
  data = 1,       // training inputs X^{n,m}
  init = 2,       // initial parameter draws
  verify = 3,     // randomized property suites
  acceptance = 4, // acceptance-suite instance generation
};

constexpr std::uint64_t counter_hash(std::uint64_t seed, Stream stream,
                                     std::uint64_t a, std::uint64_t b,
                                     std::uint64_t c) {
  std::uint64_t h = mix(seed + golden);
  h = mix(h ^ (static_cast<std::uint64_t>(stream) + golden));
  h = mix(h ^ (a + golden));
  h = mix(h ^ (b + golden));
  h = mix(h ^ (c + golden));
  return h;
}

// 53-bit mantissa draw in [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t seed, Stream stream, std::uint64_t a,
                         std::uint64_t b, std::uint64_t c, double lo,
                         double hi) {
  return lo + (hi - lo) * to_unit(counter_hash(seed, stream, a, b, c));
}

// Small sequential helper for places that just need "the next draw" within a
// fixed substream (property trials, initializers).
class SequenceGenerator {
 public:
  SequenceGenerator(std::uint64_t seed, Stream stream, std::uint64_t a,
                    std::uint64_t b)
      : seed_(seed), stream_(stream), a_(a), b_(b) {}

  std::uint64_t next_bits() { return counter_hash(seed_, stream_, a_, b_, k_++); }
  double next_unit() { return to_unit(next_bits()); }
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }
  // integer in [lo, hi] inclusive
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(next_bits() % span);
  }

 private:
  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t a_, b_;
  std::uint64_t k_ = 0;
};

}  // namespace relusgd::rng
