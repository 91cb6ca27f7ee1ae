#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <utility>

namespace cyclebal {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// xoshiro256++ stream with explicit, serializable state. One master seed
/// fans out to named child streams so that shuffling, parameter init and
/// buffer sampling stay independent of each other.
class RandomStream {
 public:
  RandomStream() : RandomStream(0) {}

  explicit RandomStream(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  static RandomStream derive(uint64_t master, std::string_view label) {
    return RandomStream(master ^ fnv1a64(label));
  }

  uint64_t nextU64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return double(nextU64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  uint64_t uniformInt(uint64_t n) {
    // rejection sampling on the top bits, unbiased
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = nextU64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller; caches the spare value.
  double normal() {
    if (hasSpare_) {
      hasSpare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    hasSpare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = static_cast<decltype(i)>(uniformInt(static_cast<uint64_t>(i) + 1));
      std::swap(first[i], first[j]);
    }
  }

  /// Full state: 4 engine words, spare value bits, spare flag.
  std::array<uint64_t, 6> serialize() const {
    std::array<uint64_t, 6> out{};
    for (int i = 0; i < 4; ++i) out[static_cast<size_t>(i)] = s_[static_cast<size_t>(i)];
    uint64_t bits = 0;
    static_assert(sizeof(double) == sizeof(uint64_t));
    std::memcpy(&bits, &spare_, sizeof(bits));
    out[4] = bits;
    out[5] = hasSpare_ ? 1 : 0;
    return out;
  }

  void restore(const std::array<uint64_t, 6>& state) {
    for (int i = 0; i < 4; ++i) s_[static_cast<size_t>(i)] = state[static_cast<size_t>(i)];
    std::memcpy(&spare_, &state[4], sizeof(spare_));
    hasSpare_ = state[5] != 0;
  }

  bool operator==(const RandomStream& o) const {
    return s_ == o.s_ && hasSpare_ == o.hasSpare_ &&
           (!hasSpare_ || spare_ == o.spare_);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool hasSpare_ = false;
};

}  // namespace cyclebal
