#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "modfault/nat.hpp"

namespace modfault {

enum class ExpOrder { L2R, R2L };

// base^exponent mod modulus. L2R runs the square-at-every-step /
// conditional-multiply loop (the structure the fault simulator instruments);
// R2L is the independent low-bit-first ladder used as a cross-check.
// modulus < 2 raises std::domain_error.
Nat mod_exp(const Nat& base, const Nat& exponent, const Nat& modulus,
            ExpOrder order = ExpOrder::L2R);

// Value-level helper with the same contract as mod_exp but free to use the
// fastest available ladder; used on hot paths that no test instruments.
Nat powm(const Nat& base, const Nat& exponent, const Nat& modulus);

// Modular inverse; throws NotInvertible when gcd(a, modulus) != 1.
Nat mod_inv(const Nat& a, const Nat& modulus);

// Miller-Rabin. Below 2^64 a deterministic base set decides exactly;
// above, `rounds` pseudo-random witnesses derived from (seed, x), so the
// verdict is stable per seed and independent of evaluation order.
bool is_probable_prime(const Nat& x, unsigned rounds = 64, std::uint64_t seed = 0);

enum class Residuosity { Residue, NonResidue, ZeroDivisor };

// Euler criterion a^((p-1)/2) mod p for odd (probable) prime p.
Residuosity euler_qr_test(const Nat& a, const Nat& p);

// Square root modulo an odd prime. Returns a root r (companion is p - r);
// the p = 3 mod 4 fast path r = a^((p+1)/4) is used when available.
// a = 0 mod p returns 0; a non-residue throws NotAResidue.
Nat tonelli_shanks_sqrt(const Nat& a, const Nat& p, std::uint64_t seed = 0);

struct Factorization {
  struct Term {
    Nat prime;
    unsigned exponent;
  };
  std::vector<Term> terms;  // distinct primes, ascending
  Nat product;
  // Set when trial division left a probable-prime cofactor above the bound;
  // the cofactor is still listed as an ordinary term.
  bool prime_cofactor = false;
};

// Convenience builder from explicit (prime, exponent) pairs.
Factorization make_factorization(const std::vector<std::pair<Nat, unsigned>>& terms);

// All square roots of a modulo f.product (odd, coprime to a): Tonelli-Shanks
// per prime, Hensel lifting to prime powers, CRT recombination. Empty result
// means a is a non-residue modulo some prime-power factor. Throws
// UnsupportedModulus for even moduli or gcd(a, product) != 1.
std::vector<Nat> sqrt_mod_smooth(const Nat& a, const Factorization& f);

// Trial division by primes <= bound (sieve capped at 2^22). A probable-prime
// cofactor above the bound is kept and flagged; a composite one is Failure
// (nullopt). Probable-prime inputs are detected before any division.
std::optional<Factorization> trial_factor_smooth(const Nat& x, const Nat& bound,
                                                 unsigned mr_rounds = 64,
                                                 std::uint64_t seed = 0);

}  // namespace modfault
