#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace knewton {

// SplitMix64 step; used to expand seeds and derive substreams.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// xoshiro256** with hand-rolled Gaussian/uniform mappings. std::mt19937 plus
// the standard distributions is not bit-portable across standard libraries;
// this generator and the mappings below are fixed by this header, so traces
// reproduce on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
    // all-zero state is invalid for xoshiro; splitmix cannot emit four zeros
    // from one stream, but keep the guard anyway
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  // Derives the seed of substream `idx` of a base seed. Used for
  // per-iteration feature draws (Algorithm-style resampling), per-trial
  // streams, and per-run seeds; the mapping is part of the reproducibility
  // contract: substream_seed(base, idx) = splitmix(splitmix(base) XOR
  // golden*(idx+1)).
  static std::uint64_t substream_seed(std::uint64_t base, std::uint64_t idx) {
    std::uint64_t x = base;
    std::uint64_t mixed = splitmix64(x);
    std::uint64_t y = mixed ^ (0x9E3779B97F4A7C15ull * (idx + 1));
    return splitmix64(y);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform double in [0, 1), 53 random bits
  double uniform53() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform double in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform53(); }

  // standard normal via Box-Muller; the second value of each pair is cached,
  // so a stream of k gaussians consumes 2*ceil-ish raw draws in a fixed,
  // documented order
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so log is finite
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform53();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Uniform k-subset of {0..n-1} without replacement via partial Fisher-Yates,
// returned sorted ascending. One algorithm shared by subset sampling
// everywhere so streams stay comparable across modules.
template <typename I>
std::vector<I> sample_index_subset(I n, I k, Rng& rng) {
  std::vector<I> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), I{0});
  for (I i = 0; i < k; ++i) {
    I j = i + static_cast<I>(rng.uniform53() * static_cast<double>(n - i));
    if (j >= n) j = n - 1;
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace knewton
