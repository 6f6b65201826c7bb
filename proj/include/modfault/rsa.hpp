#pragma once

#include <cstdint>

#include "modfault/nat.hpp"

namespace modfault {

struct RsaKeyPair {
  Nat n;  // modulus, exactly n_bits long
  Nat p;
  Nat q;
  Nat e;
  Nat d;  // e*d = 1 mod (p-1)(q-1)
  unsigned n_bits = 0;
};

// Padded message: mu is the identity on an already-reduced value (textbook
// RSA); the attack only needs the attacker to know m_dot.
struct PaddedMessage {
  Nat m_dot;  // 0 < m_dot < N, gcd(m_dot, N) = 1
};

// Deterministic per seed. n_bits >= 16 and even, e odd >= 3; throws
// KeyGenError when gcd(e, phi) cannot be satisfied within the retry budget.
RsaKeyPair generate_key(unsigned n_bits, const Nat& e, std::uint64_t seed);

// Assembles a key from fixed primes (test/oracle use); same invariants.
RsaKeyPair key_from_primes(const Nat& p, const Nat& q, const Nat& e);

// Draws m_dot uniformly from [2, N), re-drawing until gcd(m_dot, N) = 1.
PaddedMessage make_message(const RsaKeyPair& key, std::uint64_t seed);

// S = m_dot^d mod N via the Left-To-Right ladder (the instrumented target).
Nat sign(const PaddedMessage& msg, const RsaKeyPair& key);

// True iff S^e = m_dot mod N.
bool verify(const Nat& s, const PaddedMessage& msg, const Nat& n, const Nat& e);

}  // namespace modfault
