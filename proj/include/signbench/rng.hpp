#ifndef SIGNBENCH_RNG_HPP
#define SIGNBENCH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "signbench/common.hpp"

namespace signbench {

namespace detail {

// SplitMix64 step (Steele et al.). One 64-bit state, full-period, cheap.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_pair(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s) ^ (b + 0x9e3779b97f4a7c15ULL);
  return splitmix64(h);
}

}  // namespace detail

/// Deterministic seeded generator. The sequence depends only on the
/// (seed, stream) pair, so independent consumers derive disjoint streams
/// from one root seed and results do not depend on thread scheduling.
class SeededRng {
 public:
  SeededRng() : SeededRng(0, 0) {}
  SeededRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), state_(detail::mix_pair(seed, stream)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Child generator identified by (seed, hash(stream, id)). Independent of
  /// how much of this stream has been consumed.
  SeededRng substream(std::uint64_t id) const {
    return SeededRng(seed_, detail::mix_pair(stream_ + 1, id));
  }

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform index in [0, n). Multiply-shift bound (no modulo bias to 2^-64).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw Error("uniform_index: n must be positive");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller. Pairs are cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  bool bernoulli(double p) { return next_double() < p; }

  /// Fisher-Yates shuffle driven by this stream (stdlib shuffle order is
  /// implementation-defined, this one is pinned).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace signbench

#endif  // SIGNBENCH_RNG_HPP
