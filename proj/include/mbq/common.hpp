#pragma once

// Shared basics: error types, item/result vocabulary, a tiny per-process
// PRNG, and cache-line constants used by the padded array layouts.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbq {

inline constexpr std::size_t kCacheLineBytes = 64;

// Contract violations by the caller (wrong handle, IC before LL, ...).
struct UsageError : std::logic_error {
  using std::logic_error::logic_error;
};

// Exhaustive exploration exceeded its node budget.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A history is too large for the brute-force linearization search.
struct SizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Opaque queue payload. Uniqueness of enqueued values is the caller's
// concern; the test harnesses encode (process id, sequence number).
using Item = std::uint64_t;

// SplitMix64. Small enough to live inside every process handle and fast
// enough for the benchmark's random-work loop.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform draw from [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

  // Uniform draw from [lo, hi] inclusive.
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

 private:
  std::uint64_t state_;
};

// Deterministic seed derivation (master seed -> per-process streams).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  SplitMix64 g(seed ^ (salt * 0x9e3779b97f4a7c15ULL + 0x85ebca6bULL));
  return g.next();
}

namespace detail {

// 128-bit fingerprints for memoization keys. Collision odds at the node
// counts we explore are far below anything that matters.
struct Key128 {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  bool operator==(const Key128&) const = default;
};

struct Key128Hash {
  std::size_t operator()(const Key128& k) const {
    return static_cast<std::size_t>(k.a ^ (k.b * 0x9e3779b97f4a7c15ULL));
  }
};

inline Key128 mix_words(const std::vector<std::uint64_t>& words) {
  std::uint64_t a = 0x243f6a8885a308d3ULL;
  std::uint64_t b = 0x13198a2e03707344ULL;
  for (std::uint64_t w : words) {
    a ^= w;
    a *= 0xff51afd7ed558ccdULL;
    a ^= a >> 33;
    b += w ^ a;
    b *= 0xc4ceb9fe1a85ec53ULL;
    b ^= b >> 29;
  }
  return {a, b};
}

}  // namespace detail

}  // namespace mbq
