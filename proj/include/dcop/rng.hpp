#pragma once

#include <cstdint>
#include <limits>

namespace dcop {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless keyed hash: the i-th output of stream `key` is hash64(key, i).
constexpr std::uint64_t hash64(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key ^ mix64(counter * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

// Derive a child key from a parent key and a tag.
constexpr std::uint64_t derive_seed(std::uint64_t key, std::uint64_t tag) noexcept {
  return mix64(hash64(key, tag) ^ 0xd1b54a32d192ed03ULL);
}

constexpr std::uint64_t derive_seed(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(key, a), b);
}

// Top 53 bits as a double in [0,1).
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Midpoint variant, strictly inside (0,1).
constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Counter-based generator. Satisfies std::uniform_random_bit_generator, and
// the whole stream is reproducible from (key, counter) alone.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return hash64(key_, counter_++); }

  double uniform() noexcept { return bits_to_unit((*this)()); }
  double uniform_open() noexcept { return bits_to_open_unit((*this)()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal();
  double exponential();
  double gamma(double shape);
  bool bernoulli(double p) noexcept { return uniform() < p; }
  std::uint64_t below(std::uint64_t n) noexcept;

  // Independent child stream.
  CounterRng split(std::uint64_t tag) const noexcept { return CounterRng(derive_seed(key_, tag)); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace dcop
