#ifndef QEW_RNG_HPP
#define QEW_RNG_HPP

#include <cstdint>

// Counter-based random numbers: every draw is a pure function of the key
// tuple fed into the hash, so the same (seed, site, height) always yields the
// same value no matter how many workers evaluate it or in which order.

namespace qew::rng {

// SplitMix64 finalizer; bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Order-sensitive chaining of mix64 over a key tuple.
class KeyedHash {
 public:
  explicit constexpr KeyedHash(std::uint64_t seed) noexcept
      : h_(mix64(seed ^ 0x6A09E667F3BCC909ull)) {}

  constexpr KeyedHash& feed(std::uint64_t k) noexcept {
    h_ = mix64(h_ ^ k);
    return *this;
  }

  constexpr std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_;
};

// Uniform double in [0,1) from the top 53 bits.
inline constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Independent sub-seed for a tagged stream (ring resamples, perturbations, ...).
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                           std::uint64_t index = 0) noexcept {
  return KeyedHash(master).feed(tag).feed(index).value();
}

}  // namespace qew::rng

#endif
