#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace gwcls {

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace detail

/// Random stream identified by (seed, stream index).
///
/// xoshiro256** whose state is derived by SplitMix64 from a mix of the seed
/// and the stream index, so every (seed, stream) pair yields its own
/// reproducible sequence regardless of which worker consumes it. Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t sm = seed;
    const std::uint64_t a = detail::splitmix64(sm);
    std::uint64_t mix = a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    const std::uint64_t b = detail::splitmix64(mix);
    std::uint64_t st = a ^ detail::rotl(b, 17) ^ stream;
    for (auto& s : s_) s = detail::splitmix64(st);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal draw.
  double normal() { return normal_(*this); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t s_[4]{};
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stream-index namespaces so that independent experiment phases never share
/// a stream. The tag occupies the top byte of the 64-bit stream index.
enum class StreamDomain : std::uint64_t {
  Trajectory = 1,
  LimitPath = 2,
  NormalReference = 3,
  MomentGrowth = 4,
  MeanState = 5,
  Existence = 6,
};

constexpr std::uint64_t stream_id(StreamDomain domain, std::uint64_t group, std::uint64_t index) {
  return (static_cast<std::uint64_t>(domain) << 56) ^ (group << 32) ^ index;
}

}  // namespace gwcls
