#include "modfault/fault_model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "modfault/core_arith.hpp"
#include "modfault/parallel.hpp"
#include "modfault/rng.hpp"

namespace modfault {

namespace {

void check_model(const Nat& n, const FaultModel& model) {
  if (model.word_width != 8 && model.word_width != 16 && model.word_width != 32)
    throw std::domain_error("fault model: word width must be 8, 16 or 32");
  if (model.n_bits == 0 || model.n_bits % model.word_width != 0)
    throw std::domain_error("fault model: word width must divide n_bits");
  if (bit_length(n) != model.n_bits)
    throw std::domain_error("fault model: modulus bit length != n_bits");
}

}  // namespace

FaultCandidate nth_faulty_modulus(const Nat& n, const FaultModel& model, std::uint64_t ordinal) {
  const std::uint64_t per_word = model.masks_per_word();
  FaultCandidate c;
  c.word_index = static_cast<unsigned>(ordinal / per_word);
  c.mask = 1 + ordinal % per_word;
  Nat shifted = Nat(static_cast<unsigned long>(c.mask >> 32));
  shifted <<= 32;
  shifted |= Nat(static_cast<unsigned long>(c.mask & 0xffffffffULL));
  shifted <<= c.word_index * model.word_width;
  c.n_hat = n;
  mpz_xor(c.n_hat.get_mpz_t(), c.n_hat.get_mpz_t(), shifted.get_mpz_t());
  return c;
}

void enumerate_faulty_moduli(const Nat& n, const FaultModel& model,
                             const std::function<void(const FaultCandidate&)>& yield) {
  check_model(n, model);
  const std::uint64_t total = model.total_candidates();
  for (std::uint64_t i = 0; i < total; ++i) yield(nth_faulty_modulus(n, model, i));
}

namespace {

bool is_prime_trial_division(const Nat& x) {
  if (x < 2) return false;
  if (x < 4) return true;
  if (mpz_even_p(x.get_mpz_t())) return false;
  for (unsigned long p = 3; Nat(p) * p <= x; p += 2)
    if (mpz_divisible_ui_p(x.get_mpz_t(), p)) return false;
  return true;
}

}  // namespace

CensusReport census_primes(const Nat& n, const FaultModel& model, unsigned rounds,
                           std::optional<std::uint64_t> sample, std::uint64_t seed,
                           unsigned workers, bool oracle_trial_division) {
  check_model(n, model);
  if (oracle_trial_division && model.n_bits > 32)
    throw std::domain_error("census: trial-division oracle limited to 32-bit moduli");
  const std::uint64_t total = model.total_candidates();
  if (sample && *sample > total) throw std::domain_error("census: sample exceeds neighborhood");

  CensusReport report;
  report.modulus = n;
  report.model = model;
  report.per_word_index.assign(model.words(), 0);
  report.candidates_per_word.assign(model.words(), 0);

  // Ordinals under test: everything, or a uniform draw without replacement.
  std::vector<std::uint64_t> picked;
  if (sample) {
    report.sampled = true;
    report.sample_size = *sample;
    BitStream rng(derive_seed(seed, "census.sample"));
    std::set<std::uint64_t> chosen;
    for (std::uint64_t i = total - *sample; i < total; ++i) {
      std::uint64_t r = rng.below(i + 1);
      if (!chosen.insert(r).second) chosen.insert(i);
    }
    picked.assign(chosen.begin(), chosen.end());
  }
  const std::uint64_t count = sample ? picked.size() : total;
  report.total_candidates = count;

  std::vector<std::uint8_t> prime_flag(count, 0);
  parallel_for(count, workers, [&](std::uint64_t i) {
    const std::uint64_t ordinal = sample ? picked[i] : i;
    FaultCandidate c = nth_faulty_modulus(n, model, ordinal);
    const bool prime = oracle_trial_division ? is_prime_trial_division(c.n_hat)
                                             : is_probable_prime(c.n_hat, rounds, seed);
    prime_flag[i] = prime ? 1 : 0;
  });

  const std::uint64_t per_word = model.masks_per_word();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t ordinal = sample ? picked[i] : i;
    const auto word = static_cast<unsigned>(ordinal / per_word);
    report.candidates_per_word[word] += 1;
    if (prime_flag[i]) {
      report.per_word_index[word] += 1;
      report.prime_count += 1;
    }
  }
  return report;
}

namespace {

constexpr long double kLn2 = 0.69314718055994530941723212145817657L;

// Numerators of the density bounds as polynomials in t; the published 3-digit
// constants are roundings of these exact forms, which are what actually
// reproduce the quoted 1/709.477 and 1/709.474 at t = 1024.
long double density_numerator(long double t, long double own, long double other) {
  const long double L = kLn2;
  const long double c5 = L * L;
  const long double c4 = L - 4 * L * L;
  const long double c3 = 5 * L * L - 5 * L + (2 * own - other);
  const long double c2 = 6 * L - 2 * L * L - 3 * (2 * own);
  const long double c1 = 3 * (2 * own) - 2 * L;
  const long double c0 = -(2 * own);
  return ((((c5 * t + c4) * t + c3) * t + c2) * t + c1) * t + c0;
}

long double density_inf(unsigned t) {
  const long double td = t;
  const long double den = td * td * td * (td - 1) * (td - 1) * (td - 1) * kLn2 * kLn2 * kLn2;
  return density_numerator(td, 1.8L, 2.51L) / den;
}

long double density_sup(unsigned t) {
  const long double td = t;
  const long double den = td * td * td * (td - 1) * (td - 1) * (td - 1) * kLn2 * kLn2 * kLn2;
  return density_numerator(td, 2.51L, 1.8L) / den;
}

}  // namespace

DensityBounds density_bounds(unsigned t) {
  // The upper pi(x) bound needs x >= 355991, i.e. 2^t above it; t = 19 is the
  // first width where both bounds apply to the whole [2^(t-1), 2^t) range.
  if (t < 19) throw std::domain_error("density_bounds: valid for t >= 19 only");
  DensityBounds b;
  b.t = t;
  b.inf = static_cast<double>(density_inf(t));
  b.sup = static_cast<double>(density_sup(t));
  return b;
}

FaultCountEstimate expected_fault_count(unsigned t) {
  FaultCountEstimate est;
  est.lower = static_cast<double>(1.0L / density_sup(t));
  est.upper = static_cast<double>(1.0L / density_inf(t));
  est.asymptotic = static_cast<double>(t * kLn2 * kLn2 * kLn2 / 0.480L);
  return est;
}

PrimeInterval prime_count_interval(std::uint64_t k, unsigned t, double confidence) {
  if (!(confidence > 0 && confidence < 1))
    throw std::domain_error("prime_count_interval: confidence must be in (0, 1)");
  if (k == 0) return {0, 0, 0.0};

  const long double pr = (density_inf(t) + density_sup(t)) / 2;
  const long double mean = static_cast<long double>(k) * pr;
  const long double half = (1.0L - static_cast<long double>(confidence)) / 2;

  // Exact tail summation via the pmf ratio recurrence, anchored at the mean
  // (far tails below long-double underflow carry no decidable mass).
  const std::uint64_t i0 = static_cast<std::uint64_t>(mean);
  const long double log_p0 = lgammal(static_cast<long double>(k) + 1) -
                             lgammal(static_cast<long double>(i0) + 1) -
                             lgammal(static_cast<long double>(k - i0) + 1) +
                             static_cast<long double>(i0) * logl(pr) +
                             static_cast<long double>(k - i0) * log1pl(-pr);
  const long double p0 = expl(log_p0);
  constexpr long double kFloor = 1e-320L;

  std::vector<long double> down;  // pmf at i0, i0-1, ...
  {
    long double v = p0;
    std::uint64_t i = i0;
    for (;;) {
      down.push_back(v);
      if (i == 0 || v < kFloor) break;
      v *= static_cast<long double>(i) / static_cast<long double>(k - i + 1) * (1 - pr) / pr;
      --i;
    }
  }
  std::vector<long double> up;  // pmf at i0+1, i0+2, ...
  {
    long double v = p0;
    std::uint64_t i = i0;
    while (i < k) {
      v *= static_cast<long double>(k - i) / static_cast<long double>(i + 1) * pr / (1 - pr);
      ++i;
      if (v < kFloor) break;
      up.push_back(v);
    }
  }

  // a = min { i : P(X <= i) > half }; sum small-to-large from the bottom.
  std::uint64_t a = i0;
  {
    long double cum = 0;
    for (std::size_t idx = down.size(); idx-- > 0;) {
      cum += down[idx];
      if (cum > half) {
        a = i0 - idx;
        break;
      }
    }
  }
  // b = max { i : P(X >= i) > half }; sum small-to-large from the top.
  std::uint64_t b = i0;
  {
    long double tail = 0;
    bool found = false;
    for (std::size_t idx = up.size(); idx-- > 0;) {
      tail += up[idx];
      if (tail > half) {
        b = i0 + idx + 1;
        found = true;
        break;
      }
    }
    if (!found) {
      long double cum = tail;
      for (std::size_t idx = 0; idx < down.size(); ++idx) {
        cum += down[idx];
        if (cum > half) {
          b = i0 - idx;
          break;
        }
      }
    }
  }
  if (b < a) b = a;
  return {a, b, static_cast<double>(mean)};
}

PrimeDictionary build_prime_dict(const Nat& n, const FaultModel& model, std::uint64_t cap,
                                 unsigned rounds, std::uint64_t seed, unsigned workers) {
  check_model(n, model);
  const std::uint64_t total = model.total_candidates();
  std::vector<std::uint8_t> prime_flag(total, 0);
  parallel_for(total, workers, [&](std::uint64_t i) {
    FaultCandidate c = nth_faulty_modulus(n, model, i);
    prime_flag[i] = is_probable_prime(c.n_hat, rounds, seed) ? 1 : 0;
  });

  PrimeDictionary dict;
  dict.source_modulus = n;
  dict.model = model;
  dict.capacity_cap = cap;
  for (std::uint64_t i = 0; i < total; ++i) {
    if (!prime_flag[i]) continue;
    if (cap != 0 && dict.entries.size() == cap) {
      dict.truncated = true;
      break;
    }
    dict.entries.push_back(nth_faulty_modulus(n, model, i));
  }
  return dict;
}

std::string census_to_csv(const CensusReport& report) {
  std::ostringstream out;
  out << "word_index,candidates,primes\n";
  std::uint64_t cand_sum = 0;
  for (std::size_t i = 0; i < report.per_word_index.size(); ++i) {
    out << i << ',' << report.candidates_per_word[i] << ',' << report.per_word_index[i] << '\n';
    cand_sum += report.candidates_per_word[i];
  }
  out << "total," << cand_sum << ',' << report.prime_count << '\n';
  return out.str();
}

}  // namespace modfault
