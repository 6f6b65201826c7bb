#include "modfault/fault_sim.hpp"

#include <stdexcept>

#include "modfault/errors.hpp"
#include "modfault/rng.hpp"

namespace modfault {

std::string key_fingerprint(const Nat& n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_dec(n))));
  return std::string("rsa-") + buf;
}

FaultySignature sign_with_fault(const PaddedMessage& msg, const RsaKeyPair& key, const Nat& n_hat,
                                unsigned j) {
  if (n_hat < 2) throw std::domain_error("sign_with_fault: n_hat must be >= 2");
  if (j > key.n_bits) throw std::domain_error("sign_with_fault: step beyond loop length");

  // Fixed-length loop over n_bits iterations: d is processed as an n_bits-wide
  // bit string (leading zeros square harmlessly), so step j always means
  // "j iterations remain" regardless of the exponent's actual width.
  Nat a = 1;
  Nat a_at_swap = 1;
  for (unsigned idx = key.n_bits; idx-- > 0;) {
    if (idx + 1 == j) a_at_swap = a;  // register value just before the first faulted square
    const Nat& mod = (idx < j) ? n_hat : key.n;
    a = a * a % mod;
    if (mpz_tstbit(key.d.get_mpz_t(), idx)) a = a * msg.m_dot % mod;
  }
  if (j == 0) a_at_swap = a;

  FaultySignature sig;
  sig.s_hat = a;
  sig.step_j = j;
  GroundTruth truth;
  truth.n_hat = n_hat;
  truth.a_register = a_at_swap;
  truth.a_exceeds_nhat = a_at_swap >= n_hat;
  sig.ground_truth = std::move(truth);
  return sig;
}

CampaignLog run_campaign(const RsaKeyPair& key, const PaddedMessage& msg,
                         const CampaignConfig& cfg) {
  if (cfg.steps.empty()) throw std::domain_error("run_campaign: no steps");
  for (std::size_t i = 1; i < cfg.steps.size(); ++i)
    if (cfg.steps[i] <= cfg.steps[i - 1])
      throw std::domain_error("run_campaign: steps must be strictly increasing");
  if (cfg.faults_per_step == 0) throw std::domain_error("run_campaign: faults_per_step >= 1");
  if (cfg.model.n_bits != key.n_bits)
    throw std::domain_error("run_campaign: fault model does not match key size");
  if (cfg.force_prime && (cfg.dict == nullptr || cfg.dict->entries.empty()))
    throw CampaignError("force_prime requested but prime dictionary is empty");

  CampaignLog log;
  log.key_id = key_fingerprint(key.n);
  log.n_bits = key.n_bits;
  log.modulus = key.n;
  log.e = key.e;
  log.m_dot = msg.m_dot;
  log.s = sign(msg, key);
  log.model = cfg.model;
  log.seed = cfg.seed;
  log.force_prime = cfg.force_prime;

  for (unsigned j : cfg.steps) {
    // Independent stream per step so step order never shifts the draws.
    BitStream rng(derive_seed(cfg.seed, "campaign.step." + std::to_string(j)));
    CampaignStep group;
    group.step_j = j;
    for (std::uint64_t f = 0; f < cfg.faults_per_step; ++f) {
      FaultCandidate cand;
      if (cfg.force_prime) {
        cand = cfg.dict->entries[rng.below(cfg.dict->entries.size())];
      } else {
        const unsigned word = static_cast<unsigned>(rng.below(cfg.model.words()));
        const std::uint64_t mask = 1 + rng.below(cfg.model.masks_per_word());
        cand = nth_faulty_modulus(key.n, cfg.model,
                                  static_cast<std::uint64_t>(word) * cfg.model.masks_per_word() +
                                      (mask - 1));
      }
      FaultySignature sig = sign_with_fault(msg, key, cand.n_hat, j);
      sig.ground_truth->word_index = cand.word_index;
      sig.ground_truth->mask = cand.mask;
      group.signatures.push_back(std::move(sig));
    }
    log.steps.push_back(std::move(group));
  }
  return log;
}

}  // namespace modfault
