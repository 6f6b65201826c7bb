#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace modfault {

// Arbitrary-precision non-negative integer. GMP keeps values canonical, so
// equality and ordering never depend on the representation.
using Nat = mpz_class;

inline unsigned bit_length(const Nat& x) {
  if (x == 0) return 0;
  return static_cast<unsigned>(mpz_sizeinbase(x.get_mpz_t(), 2));
}

inline Nat pow2(unsigned k) {
  Nat r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, k);
  return r;
}

inline std::string to_dec(const Nat& x) { return x.get_str(10); }

inline Nat from_dec(const std::string& s) { return Nat(s, 10); }

}  // namespace modfault
