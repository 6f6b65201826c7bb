#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "modfault/nat.hpp"

namespace modfault {

// Transient w-bit XOR fault on one word of an n-bit modulus.
struct FaultModel {
  unsigned word_width = 8;  // 8, 16 or 32
  unsigned n_bits = 0;      // word_width divides n_bits

  unsigned words() const { return n_bits / word_width; }
  // Non-zero masks only: a zero mask leaves N unchanged and is unexploitable.
  std::uint64_t masks_per_word() const { return (1ull << word_width) - 1; }
  std::uint64_t total_candidates() const { return words() * masks_per_word(); }
};

struct FaultCandidate {
  Nat n_hat;
  unsigned word_index = 0;
  std::uint64_t mask = 0;  // 1 <= mask < 2^w
};

// Candidate at position `ordinal` of the (word_index, mask)-lexicographic
// enumeration; O(1), which lets censuses partition and sample uniformly.
FaultCandidate nth_faulty_modulus(const Nat& n, const FaultModel& model, std::uint64_t ordinal);

// Streams all (n_bits/w)*(2^w - 1) candidates in lexicographic order.
void enumerate_faulty_moduli(const Nat& n, const FaultModel& model,
                             const std::function<void(const FaultCandidate&)>& yield);

struct CensusReport {
  Nat modulus;
  FaultModel model;
  std::uint64_t total_candidates = 0;  // candidates actually tested
  std::uint64_t prime_count = 0;
  std::vector<std::uint64_t> per_word_index;      // primes per word position
  std::vector<std::uint64_t> candidates_per_word; // tested candidates per word position
  bool sampled = false;
  std::uint64_t sample_size = 0;
};

// Counts probable primes in the faulty-modulus neighborhood; full enumeration
// when sample is absent, else uniform sampling without replacement (raw
// counts, no scaling). oracle_trial_division switches to exact trial division
// (small moduli only).
CensusReport census_primes(const Nat& n, const FaultModel& model, unsigned rounds,
                           std::optional<std::uint64_t> sample, std::uint64_t seed,
                           unsigned workers = 1, bool oracle_trial_division = false);

// Bounds on the probability that a t-bit number is prime, from the closed-form
// degree-5-over-degree-6 polynomials; valid for t >= 19 (domain error below).
struct DensityBounds {
  unsigned t = 0;
  double inf = 0;
  double sup = 0;
  double midpoint() const { return (inf + sup) / 2; }
};

DensityBounds density_bounds(unsigned t);

struct PrimeInterval {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  double mean = 0;
};

// Smallest central interval [a, b] with binomial(k, pr_t) mass >= confidence,
// each tail holding at most (1 - confidence)/2; exact tail summation in
// log-space (no normal approximation). pr_t is the midpoint of the bounds.
PrimeInterval prime_count_interval(std::uint64_t k, unsigned t, double confidence);

struct FaultCountEstimate {
  double lower = 0;       // 1/Sup(t)
  double upper = 0;       // 1/Inf(t)
  double asymptotic = 0;  // t*ln^3(2)/0.480
};

// Expected number of random w-bit faults until the corrupted modulus is prime
// (geometric law with success probability pr_t).
FaultCountEstimate expected_fault_count(unsigned t);

struct PrimeDictionary {
  Nat source_modulus;
  FaultModel model;
  std::vector<FaultCandidate> entries;  // enumeration order
  std::uint64_t capacity_cap = 0;       // 0 = uncapped
  bool truncated = false;
};

// All probable-prime candidates of the neighborhood (64-round default),
// truncated at cap when given.
PrimeDictionary build_prime_dict(const Nat& n, const FaultModel& model, std::uint64_t cap,
                                 unsigned rounds, std::uint64_t seed, unsigned workers = 1);

// Census CSV: header, one row per word index, and a total row.
std::string census_to_csv(const CensusReport& report);

}  // namespace modfault
