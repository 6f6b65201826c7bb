#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modfault/attack.hpp"
#include "modfault/core_arith.hpp"
#include "modfault/errors.hpp"
#include "modfault/fault_model.hpp"
#include "modfault/fault_sim.hpp"
#include "modfault/json_io.hpp"
#include "modfault/rng.hpp"
#include "modfault/rsa.hpp"

namespace {

using namespace modfault;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

struct Options {
  unsigned bits = 64;
  unsigned word = 8;
  unsigned window_l = 4;
  std::uint64_t per_step = 3;
  std::string steps;
  bool force_prime = false;
  std::uint64_t sample = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out;
  std::string key_file;
  std::string campaign_file;
  std::string verify_key;
  bool redact = false;
  bool oracle = false;
  std::uint64_t dict_cap = 0;
  unsigned mr_rounds = 64;
  unsigned keys = 1;
  std::uint64_t e_value = 65537;
  std::uint64_t dict_len = 46;
  unsigned j_steps = 10;
  std::uint64_t branch_cap = 1ull << 12;
};

std::vector<unsigned> parse_steps(const std::string& text, unsigned l, unsigned n_bits) {
  std::vector<unsigned> steps;
  if (text.empty()) {
    for (unsigned j = l; j < n_bits; j += l) steps.push_back(j);
    return steps;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    steps.push_back(static_cast<unsigned>(std::stoul(text.substr(pos, next - pos))));
    pos = next + 1;
  }
  return steps;
}

RsaKeyPair load_or_generate_key(const Options& opt, const std::string& label) {
  if (!opt.key_file.empty()) return key_from_json(read_json_file(opt.key_file));
  return generate_key(opt.bits, Nat(static_cast<unsigned long>(opt.e_value)),
                      derive_seed(opt.seed, label));
}

PrimeDictionary dict_for(const Nat& n, const FaultModel& model, const Options& opt) {
  if (auto cached = load_cached_dict(n, model, opt.dict_cap, opt.mr_rounds, opt.seed))
    return *cached;
  PrimeDictionary dict = build_prime_dict(n, model, opt.dict_cap, opt.mr_rounds,
                                          derive_seed(opt.seed, "dict"), opt.workers);
  store_cached_dict(dict, opt.mr_rounds, opt.seed);
  return dict;
}

int cmd_keygen(const Options& opt) {
  RsaKeyPair key = generate_key(opt.bits, Nat(static_cast<unsigned long>(opt.e_value)),
                                derive_seed(opt.seed, "keygen"));
  const std::string out = opt.out.empty() ? "key.json" : opt.out;
  write_json_file(out, key_to_json(key));
  std::cout << "key " << key_fingerprint(key.n) << " (" << key.n_bits << " bits) -> " << out
            << "\n";
  return kExitOk;
}

int cmd_census(const Options& opt) {
  FaultModel model{opt.word, opt.bits};
  if (opt.word == 32 && opt.sample == 0) {
    std::cerr << "census: the 32-bit word model has " << model.total_candidates()
              << " candidates; pass --sample <count> to census a uniform subset\n";
    return kExitConfig;
  }
  const std::string prefix = opt.out.empty() ? "census" : opt.out;
  for (unsigned k = 0; k < opt.keys; ++k) {
    Nat n;
    if (!opt.key_file.empty()) {
      n = key_from_json(read_json_file(opt.key_file)).n;
    } else {
      n = generate_key(opt.bits, Nat(static_cast<unsigned long>(opt.e_value)),
                       derive_seed(opt.seed, "census.key." + std::to_string(k)))
              .n;
    }
    const auto sample =
        opt.sample ? std::optional<std::uint64_t>(opt.sample) : std::nullopt;
    CensusReport report = census_primes(n, model, opt.mr_rounds, sample,
                                        derive_seed(opt.seed, "census." + std::to_string(k)),
                                        opt.workers, opt.oracle);
    const std::string path =
        opt.keys == 1 ? prefix + ".csv" : prefix + "." + std::to_string(k) + ".csv";
    {
      std::FILE* f = std::fopen(path.c_str(), "w");
      if (f == nullptr) {
        std::cerr << "census: cannot write " << path << "\n";
        return kExitIo;
      }
      const std::string csv = census_to_csv(report);
      std::fwrite(csv.data(), 1, csv.size(), f);
      std::fclose(f);
    }
    PrimeInterval iv = prime_count_interval(report.total_candidates, opt.bits, 0.99999);
    std::printf("primes=%llu expected=%.4f interval=[%llu,%llu]\n",
                static_cast<unsigned long long>(report.prime_count), iv.mean,
                static_cast<unsigned long long>(iv.a), static_cast<unsigned long long>(iv.b));
  }
  return kExitOk;
}

int cmd_campaign(const Options& opt) {
  RsaKeyPair key = load_or_generate_key(opt, "campaign.key");
  PaddedMessage msg = make_message(key, derive_seed(opt.seed, "campaign.msg"));
  CampaignConfig cfg;
  cfg.model = FaultModel{opt.word, key.n_bits};
  cfg.steps = parse_steps(opt.steps, opt.window_l, key.n_bits);
  cfg.faults_per_step = opt.per_step;
  cfg.seed = opt.seed;
  cfg.force_prime = opt.force_prime;
  PrimeDictionary dict;
  if (opt.force_prime) {
    dict = dict_for(key.n, cfg.model, opt);
    cfg.dict = &dict;
  }
  CampaignLog log = run_campaign(key, msg, cfg);

  const std::string out = opt.out.empty() ? "campaign.json" : opt.out;
  write_json_file(out, campaign_to_json(log));
  if (opt.key_file.empty()) write_json_file(out + ".key.json", key_to_json(key));
  if (opt.redact) {
    std::string redacted = out;
    const auto dot = redacted.rfind(".json");
    if (dot != std::string::npos)
      redacted.replace(dot, 5, ".redacted.json");
    else
      redacted += ".redacted";
    write_json_file(redacted, campaign_to_json(log, /*redact=*/true));
  }
  std::cout << "campaign " << log.key_id << ": " << log.steps.size() << " steps x "
            << opt.per_step << " faults -> " << out << "\n";
  return kExitOk;
}

int cmd_attack(const Options& opt) {
  if (opt.campaign_file.empty()) {
    std::cerr << "attack: --campaign <file> is required\n";
    return kExitConfig;
  }
  CampaignLog log = campaign_from_json(read_json_file(opt.campaign_file));
  AttackParams params;
  params.window_l = opt.window_l;
  params.branch_cap = opt.branch_cap;
  params.mr_rounds = opt.mr_rounds;
  params.seed = opt.seed;
  params.dict = dict_for(log.modulus, log.model, opt);

  AttackOutcome outcome =
      recover_exponent(log.s, log, params, log.m_dot, log.modulus, log.e, opt.workers);
  if (!opt.out.empty()) write_json_file(opt.out, attack_report_json(outcome, params));

  if (!outcome.complete) {
    std::cerr << "partial recovery: " << outcome.partial.bits_known << " bits known, "
              << outcome.partial.reason << "\n";
    return kExitPartial;
  }
  std::cout << "d=" << to_dec(outcome.d) << "\n";
  if (!opt.verify_key.empty()) {
    RsaKeyPair key = key_from_json(read_json_file(opt.verify_key));
    if (key.d != outcome.d) {
      std::cerr << "verify-key: recovered exponent differs from the key file\n";
      return kExitPartial;
    }
    std::cout << "verify-key: match\n";
  }
  return kExitOk;
}

int cmd_estimate(const Options& opt) {
  CostEstimate cost = attack_cost_estimate(opt.bits, opt.window_l, opt.dict_len);
  std::printf("expected_faults=%.4f\n", cost.expected_faults);
  std::printf("candidate_pairs=%llu\n", static_cast<unsigned long long>(cost.candidate_pairs));
  std::printf("exponentiation_bound=%.6e\n", cost.exponentiation_bound);

  FaultCountEstimate faults = expected_fault_count(opt.bits);
  std::printf("fault_count_per_window lower=%.4f upper=%.4f asymptotic=%.4f\n", faults.lower,
              faults.upper, faults.asymptotic);
  DensityBounds density = density_bounds(opt.bits);
  std::printf("prime_density inf=%.6e sup=%.6e\n", density.inf, density.sup);
  std::printf("false_acceptance(j=%u)=%.6e\n", opt.j_steps,
              false_acceptance_bound(opt.window_l, opt.dict_len,
                                     pow2(opt.bits) - 1, opt.j_steps));

  // Measured cost of one square root at this size (informational only).
  Rng rng(derive_seed(opt.seed, "estimate.prime"));
  Nat p;
  do {
    p = rng.bits(opt.bits);
    mpz_setbit(p.get_mpz_t(), opt.bits - 1);
    mpz_setbit(p.get_mpz_t(), 0);
  } while (!is_probable_prime(p, 32, opt.seed));
  const auto t0 = std::chrono::steady_clock::now();
  constexpr unsigned kReps = 24;
  for (unsigned i = 0; i < kReps; ++i) {
    Nat a = rng.below(p - 1) + 1;
    tonelli_shanks_sqrt(a * a % p, p, opt.seed);
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() /
      kReps;
  std::printf("measured_sqrt_ms=%.4f (%u-bit prime)\n", ms, opt.bits);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modfault: fault-injection laboratory for RSA Left-To-Right exponentiation"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "master seed; every derived stream is labeled");
    cmd->add_option("--workers", opt.workers, "worker threads (outputs identical for any count)")
        ->check(CLI::Range(1u, 256u));
    cmd->add_option("--out", opt.out, "output path (or prefix for multi-file commands)");
    cmd->add_option("--mr-rounds", opt.mr_rounds, "Miller-Rabin rounds")
        ->check(CLI::Range(1u, 1024u));
  };

  CLI::App* keygen = app.add_subcommand("keygen", "generate an RSA key pair");
  keygen->add_option("--bits", opt.bits, "modulus size in bits")->check(CLI::Range(16u, 8192u));
  keygen->add_option("--e", opt.e_value, "public exponent (odd, >= 3)");
  add_common(keygen);

  CLI::App* census = app.add_subcommand("census", "count primes in a fault neighborhood");
  census->add_option("--bits", opt.bits, "modulus size in bits")->check(CLI::Range(16u, 8192u));
  census->add_option("--word", opt.word, "fault word width")->check(CLI::IsMember({8u, 16u, 32u}));
  census->add_option("--keys", opt.keys, "number of random moduli to census")
      ->check(CLI::Range(1u, 1000u));
  census->add_option("--key", opt.key_file, "census this key's modulus instead");
  census->add_option("--sample", opt.sample, "uniform sample size instead of full enumeration");
  census->add_flag("--oracle", opt.oracle, "use trial division (small moduli only)");
  add_common(census);

  CLI::App* campaign = app.add_subcommand("campaign", "run a fault-injection campaign");
  campaign->add_option("--bits", opt.bits, "key size when generating")
      ->check(CLI::Range(16u, 8192u));
  campaign->add_option("--key", opt.key_file, "sign under this key file");
  campaign->add_option("--word", opt.word, "fault word width")
      ->check(CLI::IsMember({8u, 16u, 32u}));
  campaign->add_option("--l", opt.window_l, "window width / step spacing")
      ->check(CLI::Range(1u, 24u));
  campaign->add_option("--per-step", opt.per_step, "faulty signatures per step");
  campaign->add_option("--steps", opt.steps, "comma-separated injection steps");
  campaign->add_flag("--force-prime", opt.force_prime, "draw faults from the prime dictionary");
  campaign->add_flag("--redact", opt.redact, "also write an attacker view without ground truth");
  campaign->add_option("--dict-cap", opt.dict_cap, "prime dictionary size cap (0 = none)");
  add_common(campaign);

  CLI::App* attack = app.add_subcommand("attack", "recover the private exponent");
  attack->add_option("--campaign", opt.campaign_file, "campaign log (attacker view)")
      ->required();
  attack->add_option("--l", opt.window_l, "window width")->check(CLI::Range(1u, 24u));
  attack->add_option("--branch-cap", opt.branch_cap, "root search frontier cap");
  attack->add_option("--dict-cap", opt.dict_cap, "prime dictionary size cap (0 = none)");
  attack->add_option("--verify-key", opt.verify_key, "compare the result against this key file");
  add_common(attack);

  CLI::App* estimate = app.add_subcommand("estimate", "print analytic cost estimates");
  estimate->add_option("--bits", opt.bits, "modulus size in bits")
      ->check(CLI::Range(19u, 8192u));
  estimate->add_option("--l", opt.window_l, "window width")->check(CLI::Range(1u, 24u));
  estimate->add_option("--dict", opt.dict_len, "dictionary length D");
  estimate->add_option("--j", opt.j_steps, "injection step for the false-acceptance bound");
  add_common(estimate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (keygen->parsed()) return cmd_keygen(opt);
    if (census->parsed()) return cmd_census(opt);
    if (campaign->parsed()) return cmd_campaign(opt);
    if (attack->parsed()) return cmd_attack(opt);
    if (estimate->parsed()) return cmd_estimate(opt);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CampaignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}
