#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace stlf {

// splitmix64 finalizer. Used both to expand seeds and to derive independent
// child seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for the `index`-th member of `stream`, derived from `master` by a
// counter so that adding members never changes the seeds of earlier ones.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

namespace seed_stream {
inline constexpr std::uint64_t component = 1;
inline constexpr std::uint64_t init = 2;
inline constexpr std::uint64_t swarm = 3;
inline constexpr std::uint64_t train = 4;
inline constexpr std::uint64_t probe = 5;
}  // namespace seed_stream

// Portable deterministic generator. The standard distributions are
// implementation-defined, so the uniform and shuffle helpers here only rely on
// the raw bits of mt19937_64, which the standard pins down.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0. Rejection sampling avoids modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  double operator()() { return uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stlf
