#pragma once

#include <stdexcept>
#include <string>

namespace modfault {

// gcd(a, modulus) != 1 where an inverse was required. In the attack pipeline
// this usually means a composite entry slipped into the prime dictionary.
struct NotInvertible : std::runtime_error {
  explicit NotInvertible(const std::string& what) : std::runtime_error(what) {}
};

// Square root requested for a quadratic non-residue; the attack engine treats
// this condition as a pruning signal and never lets it escape.
struct NotAResidue : std::runtime_error {
  explicit NotAResidue(const std::string& what) : std::runtime_error(what) {}
};

// sqrt_mod_smooth restriction: even modulus or a shared factor with the input.
struct UnsupportedModulus : std::runtime_error {
  explicit UnsupportedModulus(const std::string& what) : std::runtime_error(what) {}
};

// Key generation could not satisfy gcd(e, phi) = 1 within the retry budget.
struct KeyGenError : std::runtime_error {
  explicit KeyGenError(const std::string& what) : std::runtime_error(what) {}
};

// Campaign configuration cannot be executed (e.g. force_prime with an empty
// dictionary).
struct CampaignError : std::runtime_error {
  explicit CampaignError(const std::string& what) : std::runtime_error(what) {}
};

// Serialized artifact failed schema validation on read or write.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace modfault
