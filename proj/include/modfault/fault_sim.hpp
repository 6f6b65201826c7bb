#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modfault/fault_model.hpp"
#include "modfault/nat.hpp"
#include "modfault/rsa.hpp"

namespace modfault {

// What the simulator knows and the attacker must not see.
struct GroundTruth {
  Nat n_hat;
  unsigned word_index = 0;
  std::uint64_t mask = 0;
  Nat a_register;               // register value entering the faulty phase
  bool a_exceeds_nhat = false;  // A >= n_hat: correct root unrecoverable mod n_hat
};

struct FaultySignature {
  Nat s_hat;
  unsigned step_j = 0;  // loop iterations remaining at injection; the first
                        // faulted operation is the square of that iteration
  std::optional<GroundTruth> ground_truth;
};

struct CampaignStep {
  unsigned step_j = 0;
  std::vector<FaultySignature> signatures;
};

struct CampaignLog {
  std::string key_id;
  unsigned n_bits = 0;
  Nat modulus;  // public N
  Nat e;
  Nat m_dot;
  Nat s;  // correct signature
  FaultModel model;
  std::uint64_t seed = 0;
  bool force_prime = false;
  std::vector<CampaignStep> steps;
};

// Runs the square-and-multiply loop with modulus N for iterations
// n_bits-1 .. j and n_hat from the square of iteration j-1 onward.
FaultySignature sign_with_fault(const PaddedMessage& msg, const RsaKeyPair& key, const Nat& n_hat,
                                unsigned j);

struct CampaignConfig {
  std::vector<unsigned> steps;
  std::uint64_t faults_per_step = 1;
  FaultModel model;
  std::uint64_t seed = 0;
  bool force_prime = false;
  const PrimeDictionary* dict = nullptr;  // required when force_prime
};

CampaignLog run_campaign(const RsaKeyPair& key, const PaddedMessage& msg,
                         const CampaignConfig& cfg);

std::string key_fingerprint(const Nat& n);

}  // namespace modfault
