#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modfault/fault_model.hpp"
#include "modfault/fault_sim.hpp"
#include "modfault/nat.hpp"

namespace modfault {

struct AttackParams {
  unsigned window_l = 4;
  PrimeDictionary dict;
  std::uint64_t branch_cap = 1ull << 12;
  unsigned mr_rounds = 64;
  std::uint64_t seed = 0;  // non-residue draws in the root search
};

struct AcceptedWindow {
  unsigned step_j = 0;
  Nat n_hat;
  std::uint64_t window_value = 0;
};

struct RecoveryState {
  Nat d_low;  // recovered low bits, < 2^bits_known
  unsigned bits_known = 0;
  std::vector<AcceptedWindow> accepted;
  std::uint64_t collisions = 0;  // extra final-check successes
};

struct CostEstimate {
  double expected_faults = 0;
  std::uint64_t candidate_pairs = 0;
  double exponentiation_bound = 0;
};

// R = s_hat * m_dot^{-d'} mod n_hat; nullopt when m_dot has no inverse
// (the skip-this-entry signal, not an error).
std::optional<Nat> residual(const Nat& s_hat, const Nat& m_dot, const Nat& d_prime,
                            const Nat& n_hat);

enum class RootPath { Auto, Literal, Algebraic };

struct RootSearchStats {
  std::uint64_t qr_tests = 0;
  std::uint64_t prunes = 0;
  std::uint64_t max_frontier = 0;
  bool overflow = false;
};

struct RootSearchResult {
  std::vector<Nat> roots;  // ascending; every x satisfies x^(2^j) = R mod n_hat
  RootSearchStats stats;
};

// All 2^j-th roots of R modulo an odd prime. The literal path walks the
// two-way root tree level by level with residuosity pruning; the algebraic
// path (default above 2^20) builds the same set from one constructed root
// and the even-torsion roots of unity. Overflow (> branch_cap live branches,
// equivalently > branch_cap final roots) empties the result and sets the flag.
RootSearchResult iterated_sqrt_candidates(const Nat& r, unsigned j, const Nat& n_hat,
                                          std::uint64_t branch_cap = 1ull << 12,
                                          std::uint64_t seed = 0,
                                          RootPath path = RootPath::Auto);

// root^(2^j) * m_dot^{d'} == s modulo the genuine N.
bool final_check(const Nat& root, unsigned j, const Nat& d_prime, const Nat& m_dot, const Nat& n,
                 const Nat& s);

struct WindowStats {
  unsigned step_j = 0;
  std::uint64_t candidates_tested = 0;  // (signature, window, entry) triples
  std::uint64_t entries_skipped = 0;    // m_dot not invertible mod the entry
  std::uint64_t roots_checked = 0;
  std::uint64_t qr_tests = 0;
  std::uint64_t prunes = 0;
  std::uint64_t overflows = 0;
  std::uint64_t successes = 0;
  bool accepted = false;
  unsigned signature_index = 0;
  double seconds = 0;
};

// One recovery window: scan signatures in order; within a signature the
// full (window value, dictionary entry) grid is evaluated and the lowest
// ordinal success wins (extra successes count as collisions). Returns false
// and leaves state untouched when nothing passes the final check.
bool recover_window(const Nat& s, const std::vector<FaultySignature>& faults,
                    RecoveryState& state, const AttackParams& params, const Nat& m_dot,
                    const Nat& n, WindowStats* stats = nullptr, unsigned workers = 1);

struct PartialResult {
  Nat d_low;
  unsigned bits_known = 0;
  unsigned failed_step = 0;  // step whose window failed; n_bits for top-bits failure
  std::string reason;
};

struct AttackOutcome {
  bool complete = false;
  Nat d;  // meaningful only when complete
  PartialResult partial;
  RecoveryState state;
  std::vector<WindowStats> windows;
  double seconds = 0;
};

// Full recovery over a (redacted) campaign: windows by increasing
// step, then exhaustive top-bits completion validated against S. Never
// guesses: any failed window stops with a PartialResult.
AttackOutcome recover_exponent(const Nat& s, const CampaignLog& campaign,
                               const AttackParams& params, const Nat& m_dot, const Nat& n,
                               const std::optional<Nat>& e = std::nullopt, unsigned workers = 1);

// Three-term bound on a wrong pair surviving all tests, evaluated exactly.
double false_acceptance_bound(unsigned l, std::uint64_t d_length, const Nat& n, unsigned j);

CostEstimate attack_cost_estimate(unsigned n_bits, unsigned l, std::uint64_t d_length);

// Fraction of uniformly random values modulo random odd primes surviving j
// levels of root-taking with a uniformly chosen sign at each level.
double pruning_survival_probe(unsigned j, std::uint64_t trials, std::uint64_t seed);

}  // namespace modfault
