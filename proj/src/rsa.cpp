#include "modfault/rsa.hpp"

#include <stdexcept>

#include "modfault/core_arith.hpp"
#include "modfault/errors.hpp"
#include "modfault/rng.hpp"

namespace modfault {

namespace {

// Random prime of exactly `bits` bits with the top two bits set, so the
// product of two such primes always has exactly 2*bits bits.
Nat random_prime(unsigned bits, Rng& rng, std::uint64_t mr_seed) {
  for (;;) {
    Nat c = rng.bits(bits);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    mpz_setbit(c.get_mpz_t(), bits - 2);
    mpz_setbit(c.get_mpz_t(), 0);
    // Walk odd numbers upward from the draw; re-draw on block exhaustion.
    for (unsigned step = 0; step < 4096; ++step, c += 2) {
      if (bit_length(c) != bits) break;
      if (is_probable_prime(c, 64, mr_seed)) return c;
    }
  }
}

}  // namespace

RsaKeyPair key_from_primes(const Nat& p, const Nat& q, const Nat& e) {
  if (p == q) throw KeyGenError("key_from_primes: p == q");
  RsaKeyPair key;
  key.p = p;
  key.q = q;
  key.e = e;
  key.n = p * q;
  key.n_bits = bit_length(key.n);
  Nat phi = (p - 1) * (q - 1);
  key.d = mod_inv(e, phi);  // NotInvertible when gcd(e, phi) != 1
  return key;
}

RsaKeyPair generate_key(unsigned n_bits, const Nat& e, std::uint64_t seed) {
  if (n_bits < 16 || n_bits % 2 != 0)
    throw std::domain_error("generate_key: n_bits must be even and >= 16");
  if (e < 3 || mpz_even_p(e.get_mpz_t()))
    throw std::domain_error("generate_key: e must be odd and >= 3");

  Rng rng(derive_seed(seed, "rsa.keygen"));
  const std::uint64_t mr_seed = derive_seed(seed, "rsa.keygen.mr");
  for (unsigned attempt = 0; attempt < 64; ++attempt) {
    Nat p = random_prime(n_bits / 2, rng, mr_seed);
    Nat q = random_prime(n_bits / 2, rng, mr_seed);
    if (p == q) continue;
    Nat phi = (p - 1) * (q - 1);
    Nat g;
    mpz_gcd(g.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    return key_from_primes(p, q, e);
  }
  throw KeyGenError("generate_key: no key with gcd(e, phi) = 1 after 64 attempts");
}

PaddedMessage make_message(const RsaKeyPair& key, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "rsa.message"));
  for (;;) {
    Nat m = rng.below(key.n - 2) + 2;
    Nat g;
    mpz_gcd(g.get_mpz_t(), m.get_mpz_t(), key.n.get_mpz_t());
    if (g == 1) return PaddedMessage{m};
  }
}

Nat sign(const PaddedMessage& msg, const RsaKeyPair& key) {
  return mod_exp(msg.m_dot, key.d, key.n, ExpOrder::L2R);
}

bool verify(const Nat& s, const PaddedMessage& msg, const Nat& n, const Nat& e) {
  return powm(s, e, n) == msg.m_dot % n;
}

}  // namespace modfault
