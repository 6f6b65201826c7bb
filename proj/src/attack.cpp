#include "modfault/attack.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "modfault/core_arith.hpp"
#include "modfault/errors.hpp"
#include "modfault/parallel.hpp"
#include "modfault/rng.hpp"

namespace modfault {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::optional<Nat> residual(const Nat& s_hat, const Nat& m_dot, const Nat& d_prime,
                            const Nat& n_hat) {
  if (n_hat < 2) throw std::domain_error("residual: modulus must be >= 2");
  Nat g;
  mpz_gcd(g.get_mpz_t(), m_dot.get_mpz_t(), n_hat.get_mpz_t());
  if (g != 1) return std::nullopt;  // skip this candidate, nothing to invert
  const Nat inv = mod_inv(powm(m_dot, d_prime, n_hat), n_hat);
  return s_hat % n_hat * inv % n_hat;
}

namespace {

RootSearchResult literal_roots(const Nat& r0, unsigned j, const Nat& p, std::uint64_t branch_cap,
                               std::uint64_t seed) {
  RootSearchResult out;
  std::vector<Nat> frontier{r0};
  out.stats.max_frontier = 1;
  for (unsigned level = 0; level < j && !frontier.empty(); ++level) {
    std::vector<Nat> next;
    next.reserve(frontier.size() * 2);
    for (const Nat& v : frontier) {
      if (v == 0) {  // 0 is its own only root
        next.push_back(v);
        continue;
      }
      ++out.stats.qr_tests;
      if (euler_qr_test(v, p) != Residuosity::Residue) {
        ++out.stats.prunes;
        continue;
      }
      Nat r = tonelli_shanks_sqrt(v, p, seed);
      Nat other = p - r;
      next.push_back(std::move(r));
      next.push_back(std::move(other));
    }
    frontier = std::move(next);
    out.stats.max_frontier = std::max<std::uint64_t>(out.stats.max_frontier, frontier.size());
    if (frontier.size() > branch_cap) {
      out.stats.overflow = true;
      return out;
    }
  }
  std::sort(frontier.begin(), frontier.end());
  out.roots = std::move(frontier);
  return out;
}

// Same root set as the literal tree walk, but built from one constructed
// root and the 2^m-torsion roots of unity (m = min(j, v2(p-1))): every
// intermediate of a genuine 2^j-th root is a square by construction, so the
// full set is x0 * <zeta> and solvability collapses to one character test.
RootSearchResult algebraic_roots(const Nat& r0, unsigned j, const Nat& p, std::uint64_t branch_cap,
                                 std::uint64_t seed) {
  RootSearchResult out;
  const Nat pm1 = p - 1;
  const unsigned e = static_cast<unsigned>(mpz_scan1(pm1.get_mpz_t(), 0));
  const Nat q = pm1 >> e;
  const unsigned m = std::min(j, e);

  out.stats.max_frontier = m >= 63 ? UINT64_MAX : (1ull << m);
  if (m >= 63 || (1ull << m) > branch_cap) {
    out.stats.overflow = true;
    return out;
  }

  ++out.stats.qr_tests;
  if (powm(r0, pm1 >> m, p) != 1) {  // not a 2^j-th power
    ++out.stats.prunes;
    return out;
  }

  Nat x0;
  if (j >= e) {
    if (q == 1) {
      x0 = 1;  // group order 2^e; solvable means r0 == 1
    } else {
      const Nat alpha = mod_inv(pow2(j) % q, q);
      x0 = powm(r0, alpha, p);  // x0^(2^j) = r0 * (r0^q)^t = r0
    }
  } else {
    // j < e: descend one level at a time; of the two roots exactly one stays
    // a 2^(j-t)-th power until the remaining depth fits inside the 2-torsion.
    Nat y = r0;
    for (unsigned t = 1; t <= j; ++t) {
      Nat r = tonelli_shanks_sqrt(y, p, seed);
      if (t < j) {
        ++out.stats.qr_tests;
        if (powm(r, pm1 >> (j - t), p) != 1) r = p - r;
      }
      y = std::move(r);
    }
    x0 = std::move(y);
  }

  out.roots.reserve(1ull << m);
  out.roots.push_back(x0);
  if (m > 0) {
    Nat z = 0;
    for (unsigned c = 2; c < 64; ++c) {
      ++out.stats.qr_tests;
      if (euler_qr_test(Nat(c), p) == Residuosity::NonResidue) {
        z = c;
        break;
      }
    }
    if (z == 0) {
      Rng rng(derive_seed(seed, "rootsearch.nonresidue"));
      do {
        z = rng.below(p - 2) + 2;
        ++out.stats.qr_tests;
      } while (euler_qr_test(z, p) != Residuosity::NonResidue);
    }
    Nat zeta = powm(z, q << (e - m), p);  // order exactly 2^m
    Nat x = x0;
    for (std::uint64_t i = 1; i < (1ull << m); ++i) {
      x = x * zeta % p;
      out.roots.push_back(x);
    }
  }
  std::sort(out.roots.begin(), out.roots.end());
  return out;
}

}  // namespace

RootSearchResult iterated_sqrt_candidates(const Nat& r, unsigned j, const Nat& n_hat,
                                          std::uint64_t branch_cap, std::uint64_t seed,
                                          RootPath path) {
  if (n_hat < 3 || mpz_even_p(n_hat.get_mpz_t()))
    throw std::domain_error("iterated_sqrt_candidates: modulus must be an odd prime");
  if (branch_cap == 0) throw std::domain_error("iterated_sqrt_candidates: branch_cap >= 1");
  const Nat r0 = r % n_hat;
  if (j == 0) {
    RootSearchResult out;
    out.roots = {r0};
    out.stats.max_frontier = 1;
    return out;
  }
  if (r0 == 0) {
    RootSearchResult out;
    out.roots = {Nat(0)};
    out.stats.max_frontier = 1;
    return out;
  }
  const bool algebraic =
      path == RootPath::Algebraic || (path == RootPath::Auto && bit_length(n_hat) > 20);
  return algebraic ? algebraic_roots(r0, j, n_hat, branch_cap, seed)
                   : literal_roots(r0, j, n_hat, branch_cap, seed);
}

bool final_check(const Nat& root, unsigned j, const Nat& d_prime, const Nat& m_dot, const Nat& n,
                 const Nat& s) {
  if (n < 2) throw std::domain_error("final_check: modulus must be >= 2");
  const Nat lhs = powm(root, pow2(j), n) * powm(m_dot, d_prime, n) % n;
  return lhs == s % n;
}

bool recover_window(const Nat& s, const std::vector<FaultySignature>& faults,
                    RecoveryState& state, const AttackParams& params, const Nat& m_dot,
                    const Nat& n, WindowStats* stats_out, unsigned workers) {
  if (faults.empty()) return false;
  const unsigned j = faults.front().step_j;
  for (const auto& f : faults)
    if (f.step_j != j) throw std::domain_error("recover_window: mixed steps in one group");
  if (j <= state.bits_known)
    throw std::domain_error("recover_window: step must exceed known bits");
  const unsigned lk = j - state.bits_known;
  if (lk > params.window_l) throw std::domain_error("recover_window: window wider than l");

  const auto t0 = std::chrono::steady_clock::now();
  WindowStats ws;
  ws.step_j = j;

  const std::uint64_t n_entries = params.dict.entries.size();
  const std::uint64_t grid = (1ull << lk) * n_entries;

  struct CandidateOutcome {
    std::uint32_t successes = 0;
    std::uint32_t roots = 0;
    std::uint32_t qr_tests = 0;
    std::uint32_t prunes = 0;
    std::uint8_t skipped = 0;
    std::uint8_t overflow = 0;
  };

  for (std::size_t fi = 0; fi < faults.size() && !ws.accepted; ++fi) {
    const Nat& s_hat = faults[fi].s_hat;
    std::vector<CandidateOutcome> grid_out(grid);
    parallel_for(grid, workers, [&](std::uint64_t ord) {
      CandidateOutcome& co = grid_out[ord];
      const std::uint64_t w = ord / n_entries;
      const Nat& n_hat = params.dict.entries[ord % n_entries].n_hat;
      const Nat d_prime = (Nat(static_cast<unsigned long>(w)) << state.bits_known) + state.d_low;
      const auto res = residual(s_hat, m_dot, d_prime, n_hat);
      if (!res) {
        co.skipped = 1;
        return;
      }
      const auto found = iterated_sqrt_candidates(*res, j, n_hat, params.branch_cap, params.seed);
      co.qr_tests = static_cast<std::uint32_t>(found.stats.qr_tests);
      co.prunes = static_cast<std::uint32_t>(found.stats.prunes);
      co.overflow = found.stats.overflow ? 1 : 0;
      for (const Nat& root : found.roots) {
        ++co.roots;
        if (final_check(root, j, d_prime, m_dot, n, s)) ++co.successes;
      }
    });

    std::uint64_t first = grid;
    std::uint64_t events = 0;
    for (std::uint64_t ord = 0; ord < grid; ++ord) {
      const CandidateOutcome& co = grid_out[ord];
      ws.candidates_tested += 1;
      ws.entries_skipped += co.skipped;
      ws.roots_checked += co.roots;
      ws.qr_tests += co.qr_tests;
      ws.prunes += co.prunes;
      ws.overflows += co.overflow;
      if (co.successes > 0) {
        events += co.successes;
        if (first == grid) first = ord;
      }
    }
    if (first < grid) {
      const std::uint64_t w = first / n_entries;
      const auto& entry = params.dict.entries[first % n_entries];
      state.d_low += Nat(static_cast<unsigned long>(w)) << state.bits_known;
      state.bits_known = j;
      state.accepted.push_back({j, entry.n_hat, w});
      state.collisions += events - 1;
      ws.successes = events;
      ws.accepted = true;
      ws.signature_index = static_cast<unsigned>(fi);
    }
  }

  ws.seconds = seconds_since(t0);
  if (stats_out) *stats_out = ws;
  return ws.accepted;
}

AttackOutcome recover_exponent(const Nat& s, const CampaignLog& campaign,
                               const AttackParams& params, const Nat& m_dot, const Nat& n,
                               const std::optional<Nat>& e, unsigned workers) {
  const auto t0 = std::chrono::steady_clock::now();
  AttackOutcome out;
  RecoveryState st;

  const auto give_up = [&](unsigned step, std::string reason) {
    out.complete = false;
    out.partial = {st.d_low, st.bits_known, step, std::move(reason)};
    out.state = st;
    out.seconds = seconds_since(t0);
    return out;
  };

  if (campaign.steps.empty()) return give_up(0, "campaign holds no faulty signatures");

  for (const CampaignStep& group : campaign.steps) {
    const unsigned j = group.step_j;
    if (j <= st.bits_known)
      throw std::domain_error("recover_exponent: campaign steps must be strictly increasing");
    if (j - st.bits_known > params.window_l)
      return give_up(j, "gap to step " + std::to_string(j) + " exceeds the window width");
    WindowStats ws;
    const bool ok = recover_window(s, group.signatures, st, params, m_dot, n, &ws, workers);
    out.windows.push_back(ws);
    if (!ok) {
      std::string reason = "no candidate passed the final check at step " + std::to_string(j);
      if (ws.overflows > 0)
        reason += " (" + std::to_string(ws.overflows) + " root searches hit the branch cap)";
      return give_up(j, reason);
    }
  }

  // Close the key: the bits above the last fault location, by exhaustion.
  const unsigned top = campaign.n_bits - st.bits_known;
  if (top > 24)
    return give_up(campaign.n_bits, "top gap of " + std::to_string(top) +
                                        " bits is too wide for exhaustive completion");
  bool found = false;
  Nat d;
  std::uint64_t extras = 0;
  for (std::uint64_t w = 0; w < (1ull << top); ++w) {
    const Nat cand = (Nat(static_cast<unsigned long>(w)) << st.bits_known) + st.d_low;
    if (powm(m_dot, cand, n) == s % n) {
      if (!found) {
        d = cand;
        found = true;
      } else {
        ++extras;
      }
    }
  }
  if (!found) return give_up(campaign.n_bits, "no top-bits value reproduces the signature");
  st.collisions += extras;

  if (e) {
    const Nat x = Nat(2) % n;
    if (powm(powm(x, d, n), *e, n) != x)
      return give_up(campaign.n_bits, "recovered exponent fails the public-exponent round-trip");
  }

  out.complete = true;
  out.d = d;
  out.state = st;
  out.seconds = seconds_since(t0);
  return out;
}

double false_acceptance_bound(unsigned l, std::uint64_t d_length, const Nat& n, unsigned j) {
  if (l == 0 || d_length == 0 || n < 2)
    throw std::domain_error("false_acceptance_bound: inputs must be positive");
  const Nat pairs = pow2(l) * Nat(static_cast<unsigned long>(d_length));
  mpq_class t1(Nat(1), pow2(j));
  t1.canonicalize();
  mpq_class t2(Nat(n - 1) * pairs, n * (pairs - 1));
  t2.canonicalize();
  mpq_class t3(pairs, n);
  t3.canonicalize();
  return std::min({t1, t2, t3}).get_d();
}

CostEstimate attack_cost_estimate(unsigned n_bits, unsigned l, std::uint64_t d_length) {
  if (n_bits == 0 || l == 0 || d_length == 0)
    throw std::domain_error("attack_cost_estimate: inputs must be positive");
  if (l > 56) throw std::domain_error("attack_cost_estimate: window too wide");
  CostEstimate c;
  const double nb = n_bits;
  c.expected_faults = nb * nb / (1.441 * l);
  c.candidate_pairs = (1ull << l) * d_length;
  c.exponentiation_bound = std::ldexp(nb * nb * nb * (nb + l), 8 + static_cast<int>(l)) / (16.0 * l);
  return c;
}

double pruning_survival_probe(unsigned j, std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::domain_error("pruning_survival_probe: trials must be positive");

  // A fixed pool of ~32-bit primes; each trial draws a prime and a uniform
  // nonzero value, then walks j root-taking levels with random signs.
  std::vector<Nat> pool;
  BitStream prime_rng(derive_seed(seed, "probe.primes"));
  while (pool.size() < 256) {
    std::uint64_t c = prime_rng.below(1ull << 32) | (1ull << 31) | 1ull;
    if (is_probable_prime(Nat(static_cast<unsigned long>(c)), 32, seed))
      pool.push_back(Nat(static_cast<unsigned long>(c)));
  }

  BitStream rng(derive_seed(seed, "probe.trials"));
  std::uint64_t survived = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const Nat& p = pool[rng.below(pool.size())];
    const std::uint64_t p64 = mpz_get_ui(p.get_mpz_t());
    Nat v = Nat(static_cast<unsigned long>(1 + rng.below(p64 - 1)));
    bool alive = true;
    for (unsigned level = 0; level < j; ++level) {
      if (euler_qr_test(v, p) != Residuosity::Residue) {
        alive = false;
        break;
      }
      Nat r = tonelli_shanks_sqrt(v, p, seed);
      v = rng.bit() ? Nat(p - r) : r;
    }
    if (alive) ++survived;
  }
  return static_cast<double>(survived) / static_cast<double>(trials);
}

}  // namespace modfault
