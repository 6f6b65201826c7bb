#include "modfault/core_arith.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>

#include "modfault/errors.hpp"
#include "modfault/rng.hpp"

namespace modfault {

Nat powm(const Nat& base, const Nat& exponent, const Nat& modulus) {
  Nat r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exponent.get_mpz_t(), modulus.get_mpz_t());
  return r;
}

Nat mod_exp(const Nat& base, const Nat& exponent, const Nat& modulus, ExpOrder order) {
  if (modulus < 2) throw std::domain_error("mod_exp: modulus must be >= 2");
  const unsigned n = bit_length(exponent);
  Nat a = 1;
  if (order == ExpOrder::L2R) {
    // Square at every iteration, multiply only on a set bit.
    Nat b = base % modulus;
    for (unsigned i = n; i-- > 0;) {
      a = a * a % modulus;
      if (mpz_tstbit(exponent.get_mpz_t(), i)) a = a * b % modulus;
    }
  } else {
    // Low bit first: accumulate into a while repeatedly squaring b.
    Nat b = base % modulus;
    for (unsigned i = 0; i < n; ++i) {
      if (mpz_tstbit(exponent.get_mpz_t(), i)) a = a * b % modulus;
      b = b * b % modulus;
    }
  }
  return a;
}

Nat mod_inv(const Nat& a, const Nat& modulus) {
  if (modulus < 2) throw std::domain_error("mod_inv: modulus must be >= 2");
  Nat r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t()) == 0)
    throw NotInvertible("mod_inv: gcd(a, modulus) != 1");
  return r;
}

namespace {

// Odd primes below 4096 and their product; one gcd against the product
// rejects ~86% of odd composites before any exponentiation.
const std::vector<unsigned>& small_primes() {
  static const std::vector<unsigned> table = [] {
    std::vector<unsigned> primes;
    std::vector<bool> sieve(4096, true);
    for (unsigned p = 2; p < 4096; ++p) {
      if (!sieve[p]) continue;
      primes.push_back(p);
      for (unsigned q = p * p; q < 4096; q += p) sieve[q] = false;
    }
    return primes;
  }();
  return table;
}

const Nat& odd_primorial() {
  static const Nat value = [] {
    Nat prod = 1;
    for (unsigned p : small_primes())
      if (p > 2) prod *= p;
    return prod;
  }();
  return value;
}

bool mr_witness_passes(const Nat& x, const Nat& base, const Nat& d, unsigned s) {
  Nat b = base % x;
  if (b == 0) return true;
  Nat y = powm(b, d, x);
  if (y == 1 || y == x - 1) return true;
  for (unsigned i = 1; i < s; ++i) {
    y = y * y % x;
    if (y == x - 1) return true;
    if (y == 1) return false;  // nontrivial square root of 1
  }
  return false;
}

}  // namespace

bool is_probable_prime(const Nat& x, unsigned rounds, std::uint64_t seed) {
  if (rounds < 1) throw std::domain_error("is_probable_prime: rounds must be >= 1");
  if (x < 2) return false;
  if (x == 2) return true;
  if (mpz_even_p(x.get_mpz_t())) return false;

  if (mpz_cmp_ui(x.get_mpz_t(), 4096) < 0) {
    const unsigned v = static_cast<unsigned>(mpz_get_ui(x.get_mpz_t()));
    const auto& primes = small_primes();
    return std::binary_search(primes.begin(), primes.end(), v);
  }
  Nat g;
  mpz_gcd(g.get_mpz_t(), x.get_mpz_t(), odd_primorial().get_mpz_t());
  if (g != 1) return false;

  Nat d = x - 1;
  unsigned s = 0;
  while (mpz_even_p(d.get_mpz_t())) {
    d >>= 1;
    ++s;
  }

  if (mpz_sizeinbase(x.get_mpz_t(), 2) <= 64) {
    // Deterministic for all odd x < 2^64 (e.g. Sorenson & Webster).
    static const std::array<unsigned, 12> bases = {2,  3,  5,  7,  11, 13,
                                                   17, 19, 23, 29, 31, 37};
    for (unsigned b : bases) {
      if (!mr_witness_passes(x, Nat(b), d, s)) return false;
    }
    return true;
  }

  // Witness stream keyed by (seed, x) so a candidate's verdict does not
  // depend on which worker or call order reached it.
  BitStream ws(splitmix64(seed ^ mpz_fdiv_ui(x.get_mpz_t(), 0xffffffffffffffc5ULL)));
  for (unsigned i = 0; i < rounds; ++i) {
    const std::uint64_t w = 2 + ws.below(UINT64_MAX - 4);
    Nat base = Nat(static_cast<unsigned long>(w >> 32));
    base <<= 32;
    base |= Nat(static_cast<unsigned long>(w & 0xffffffffULL));
    if (!mr_witness_passes(x, base, d, s)) return false;
  }
  return true;
}

Residuosity euler_qr_test(const Nat& a, const Nat& p) {
  if (p < 3 || mpz_even_p(p.get_mpz_t()))
    throw std::domain_error("euler_qr_test: p must be an odd prime >= 3");
  Nat r = a % p;
  if (r == 0) return Residuosity::ZeroDivisor;
  Nat t = powm(r, (p - 1) / 2, p);
  return t == 1 ? Residuosity::Residue : Residuosity::NonResidue;
}

Nat tonelli_shanks_sqrt(const Nat& a, const Nat& p, std::uint64_t seed) {
  if (p < 3 || mpz_even_p(p.get_mpz_t()))
    throw std::domain_error("tonelli_shanks_sqrt: p must be an odd prime >= 3");
  Nat v = a % p;
  if (v == 0) return Nat(0);
  if (euler_qr_test(v, p) != Residuosity::Residue)
    throw NotAResidue("tonelli_shanks_sqrt: a is not a quadratic residue");

  if (mpz_fdiv_ui(p.get_mpz_t(), 4) == 3) return powm(v, (p + 1) / 4, p);

  // p - 1 = 2^e * r with r odd.
  Nat r = p - 1;
  unsigned e = 0;
  while (mpz_even_p(r.get_mpz_t())) {
    r >>= 1;
    ++e;
  }

  // Any non-residue works; scan small values first, fall back to seeded draws.
  Nat z = 0;
  for (unsigned c = 2; c < 64; ++c) {
    if (euler_qr_test(Nat(c), p) == Residuosity::NonResidue) {
      z = c;
      break;
    }
  }
  if (z == 0) {
    Rng rng(derive_seed(seed, "tonelli.nonresidue"));
    do {
      z = rng.below(p - 2) + 2;
    } while (euler_qr_test(z, p) != Residuosity::NonResidue);
  }

  Nat c = powm(z, r, p);
  Nat x = powm(v, (r + 1) / 2, p);
  Nat t = powm(v, r, p);
  unsigned m = e;
  while (t != 1) {
    Nat t2 = t;
    unsigned i = 0;
    while (t2 != 1) {
      t2 = t2 * t2 % p;
      ++i;
      // For prime p and residue v this terminates with i < m; a composite
      // slipping through the primality filter must not hang the search.
      if (i >= m) throw NotAResidue("tonelli_shanks_sqrt: no convergence, modulus not prime?");
    }
    Nat b = c;
    for (unsigned k = 0; k + i + 1 < m; ++k) b = b * b % p;
    x = x * b % p;
    c = b * b % p;
    t = t * c % p;
    m = i;
  }
  return x;
}

Factorization make_factorization(const std::vector<std::pair<Nat, unsigned>>& terms) {
  Factorization f;
  f.product = 1;
  for (const auto& [prime, exponent] : terms) {
    Factorization::Term t;
    t.prime = prime;
    t.exponent = exponent;
    f.terms.push_back(t);
    for (unsigned i = 0; i < exponent; ++i) f.product *= prime;
  }
  std::sort(f.terms.begin(), f.terms.end(),
            [](const auto& a, const auto& b) { return a.prime < b.prime; });
  return f;
}

namespace {

// Square roots of a modulo p^k for odd prime p, gcd(a, p) = 1: the two roots
// mod p, each lifted uniquely (Hensel) one power at a time.
std::vector<Nat> roots_mod_prime_power(const Nat& a, const Nat& p, unsigned k) {
  Nat a0 = a % p;
  if (euler_qr_test(a0, p) != Residuosity::Residue) return {};
  Nat r = tonelli_shanks_sqrt(a0, p);
  std::vector<Nat> roots = {r, p - r};
  Nat pk = p;
  for (unsigned i = 1; i < k; ++i) {
    Nat pk1 = pk * p;
    for (Nat& x : roots) {
      // x' = x - (x^2 - a) * (2x)^-1 mod p^(i+1)
      Nat num = (x * x - a) % pk1;
      if (num < 0) num += pk1;
      Nat inv = mod_inv(2 * x % pk1, pk1);
      x = (x - num * inv) % pk1;
      if (x < 0) x += pk1;
    }
    pk = pk1;
  }
  return roots;
}

}  // namespace

std::vector<Nat> sqrt_mod_smooth(const Nat& a, const Factorization& f) {
  if (f.product < 3 || mpz_even_p(f.product.get_mpz_t()))
    throw UnsupportedModulus("sqrt_mod_smooth: modulus must be odd and >= 3");
  Nat g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), f.product.get_mpz_t());
  if (g != 1) throw UnsupportedModulus("sqrt_mod_smooth: gcd(a, modulus) != 1");

  // Roots per prime power, then CRT over every combination.
  std::vector<Nat> acc = {Nat(0)};
  Nat acc_mod = 1;
  for (const auto& term : f.terms) {
    Nat pk;
    mpz_pow_ui(pk.get_mpz_t(), term.prime.get_mpz_t(), term.exponent);
    std::vector<Nat> local = roots_mod_prime_power(a % pk, term.prime, term.exponent);
    if (local.empty()) return {};
    std::vector<Nat> next;
    next.reserve(acc.size() * local.size());
    Nat minv = mod_inv(acc_mod % pk, pk);
    for (const Nat& x : acc) {
      for (const Nat& y : local) {
        // Combine x mod acc_mod with y mod pk.
        Nat delta = (y - x) % pk;
        if (delta < 0) delta += pk;
        next.push_back(x + acc_mod * (delta * minv % pk));
      }
    }
    acc = std::move(next);
    acc_mod *= pk;
  }
  std::sort(acc.begin(), acc.end());
  return acc;
}

std::optional<Factorization> trial_factor_smooth(const Nat& x, const Nat& bound,
                                                 unsigned mr_rounds, std::uint64_t seed) {
  if (x < 2 || bound < 2) throw std::domain_error("trial_factor_smooth: x, bound must be >= 2");
  if (is_probable_prime(x, mr_rounds, seed)) {
    Factorization f = make_factorization({{x, 1}});
    f.prime_cofactor = x > bound;
    return f;
  }

  constexpr unsigned long kSieveCap = 1u << 22;
  const unsigned long b = mpz_cmp_ui(bound.get_mpz_t(), kSieveCap) > 0
                              ? kSieveCap
                              : static_cast<unsigned long>(mpz_get_ui(bound.get_mpz_t()));
  Nat rest = x;
  std::vector<std::pair<Nat, unsigned>> terms;
  auto strip = [&](unsigned long p) {
    unsigned count = 0;
    while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
      mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
      ++count;
    }
    if (count) terms.emplace_back(Nat(p), count);
  };
  strip(2);
  if (b >= 3) strip(3);
  for (unsigned long p = 5; p <= b && rest > 1; p += 6) {
    strip(p);
    if (p + 2 <= b) strip(p + 2);
    if (rest > 1 && rest <= bound && is_probable_prime(rest, mr_rounds, seed)) break;
  }

  bool flag = false;
  if (rest > 1) {
    if (!is_probable_prime(rest, mr_rounds, seed)) return std::nullopt;
    flag = rest > bound;
    terms.emplace_back(rest, 1);
  }
  Factorization f = make_factorization(terms);
  f.prime_cofactor = flag;
  return f;
}

}  // namespace modfault
