#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace spinpath {

// Seedable, splittable generator (xoshiro-style splitmix scrambler feeding a
// 64-bit xorshift core). All sampling helpers are implemented here rather
// than through <random> distributions so that results are reproducible
// across standard libraries. Streams are derived by name or index: child
// streams are statistically independent and deterministic in (seed, tag).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ULL) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    state_ = splitmix(seed + 0x9e3779b97f4a7c15ULL);
    if (state_ == 0) state_ = 0x106689d45497fdb5ULL;
  }

  // Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const {
    Rng child;
    child.state_ = splitmix(state_ ^ splitmix(stream * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL));
    if (child.state_ == 0) child.state_ = 0x106689d45497fdb5ULL;
    return child;
  }
  Rng split(const std::string& tag) const { return split(fnv1a(tag)); }

  std::uint64_t next_u64() {
    // xorshift64* step
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased (rejection).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t lim = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= lim);
    return x % n;
  }
  int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    // Box-Muller; second value discarded to keep the stream position simple.
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Sample an index from unnormalized nonnegative weights.
  int discrete(const std::vector<double>& w);

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  static std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::uint64_t state_ = 0;
};

inline int Rng::discrete(const std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

}  // namespace spinpath
