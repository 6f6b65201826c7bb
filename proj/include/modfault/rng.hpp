#pragma once

#include <cstdint>
#include <string_view>

#include "modfault/nat.hpp"

namespace modfault {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Every run derives all subordinate seeds from one master seed and a task
// label, so partial re-runs reproduce regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return splitmix64(master ^ fnv1a64(label));
}

// Small deterministic stream built on splitmix64. Used wherever portable,
// seed-stable draws of machine words are enough.
class BitStream {
 public:
  explicit BitStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  bool bit() { return next() >> 63; }

 private:
  std::uint64_t state_;
};

// Deterministic big-integer PRNG (Mersenne Twister via GMP, fixed algorithm,
// so streams are identical across platforms for a given seed).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(gmp_randinit_mt) {
    Nat s = Nat(static_cast<unsigned long>(seed >> 32));
    s <<= 32;
    s |= Nat(static_cast<unsigned long>(seed & 0xffffffffULL));
    state_.seed(s);
  }

  // Uniform integer with exactly `bits` random bits (may have leading zeros).
  Nat bits(unsigned n) { return state_.get_z_bits(n); }

  // Uniform in [0, bound).
  Nat below(const Nat& bound) { return state_.get_z_range(bound); }

  std::uint64_t u64() {
    Nat v = state_.get_z_bits(64);
    std::uint64_t lo = mpz_get_ui(v.get_mpz_t());
    if (sizeof(unsigned long) >= 8) return lo;
    Nat hi = v >> 32;
    return (static_cast<std::uint64_t>(mpz_get_ui(hi.get_mpz_t())) << 32) | (lo & 0xffffffffULL);
  }

 private:
  gmp_randclass state_;
};

}  // namespace modfault
