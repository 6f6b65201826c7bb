#include "modfault/json_io.hpp"

#include <cstdlib>
#include <fstream>

#include "modfault/errors.hpp"
#include "modfault/rng.hpp"

namespace modfault {

namespace {

using nlohmann::json;

std::string dec_u(std::uint64_t v) { return std::to_string(v); }

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field: ") + key);
  return *it;
}

Nat get_nat(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw SchemaError(std::string("field not a decimal string: ") + key);
  try {
    Nat x = from_dec(v.get<std::string>());
    if (x < 0) throw SchemaError(std::string("negative value: ") + key);
    return x;
  } catch (const std::invalid_argument&) {
    throw SchemaError(std::string("malformed decimal string: ") + key);
  }
}

std::uint64_t get_u64(const json& j, const char* key) {
  const Nat x = get_nat(j, key);
  if (!x.fits_ulong_p()) throw SchemaError(std::string("value out of range: ") + key);
  return mpz_get_ui(x.get_mpz_t());
}

unsigned get_u32(const json& j, const char* key) {
  const std::uint64_t v = get_u64(j, key);
  if (v > UINT32_MAX) throw SchemaError(std::string("value out of range: ") + key);
  return static_cast<unsigned>(v);
}

bool get_bool(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_boolean()) throw SchemaError(std::string("field not a boolean: ") + key);
  return v.get<bool>();
}

json model_to_json(const FaultModel& model) {
  return json{{"word_width", dec_u(model.word_width)}, {"n_bits", dec_u(model.n_bits)}};
}

FaultModel model_from_json(const json& j) {
  FaultModel m;
  m.word_width = get_u32(j, "word_width");
  m.n_bits = get_u32(j, "n_bits");
  return m;
}

}  // namespace

json key_to_json(const RsaKeyPair& key) {
  return json{{"n_bits", dec_u(key.n_bits)}, {"N", to_dec(key.n)}, {"p", to_dec(key.p)},
              {"q", to_dec(key.q)},          {"e", to_dec(key.e)}, {"d", to_dec(key.d)}};
}

RsaKeyPair key_from_json(const json& j) {
  RsaKeyPair key;
  key.n_bits = get_u32(j, "n_bits");
  key.n = get_nat(j, "N");
  key.p = get_nat(j, "p");
  key.q = get_nat(j, "q");
  key.e = get_nat(j, "e");
  key.d = get_nat(j, "d");
  if (key.p * key.q != key.n) throw SchemaError("key file: N != p*q");
  if (bit_length(key.n) != key.n_bits) throw SchemaError("key file: N has the wrong bit length");
  return key;
}

json campaign_to_json(const CampaignLog& log, bool redact) {
  json steps = json::array();
  for (const CampaignStep& group : log.steps) {
    json sigs = json::array();
    for (const FaultySignature& sig : group.signatures) {
      json js{{"s_hat", to_dec(sig.s_hat)}, {"step_j", dec_u(sig.step_j)}};
      if (!redact && sig.ground_truth) {
        const GroundTruth& gt = *sig.ground_truth;
        js["ground_truth"] = json{{"n_hat", to_dec(gt.n_hat)},
                                  {"word_index", dec_u(gt.word_index)},
                                  {"mask", dec_u(gt.mask)},
                                  {"a_register", to_dec(gt.a_register)},
                                  {"a_exceeds_nhat", gt.a_exceeds_nhat}};
      }
      sigs.push_back(std::move(js));
    }
    steps.push_back(json{{"step_j", dec_u(group.step_j)}, {"signatures", std::move(sigs)}});
  }
  return json{{"key_id", log.key_id},
              {"n_bits", dec_u(log.n_bits)},
              {"N", to_dec(log.modulus)},
              {"e", to_dec(log.e)},
              {"m_dot", to_dec(log.m_dot)},
              {"s", to_dec(log.s)},
              {"model", model_to_json(log.model)},
              {"seed", dec_u(log.seed)},
              {"force_prime", log.force_prime},
              {"redacted", redact},
              {"steps", std::move(steps)}};
}

CampaignLog campaign_from_json(const json& j) {
  CampaignLog log;
  log.key_id = field(j, "key_id").get<std::string>();
  log.n_bits = get_u32(j, "n_bits");
  log.modulus = get_nat(j, "N");
  log.e = get_nat(j, "e");
  log.m_dot = get_nat(j, "m_dot");
  log.s = get_nat(j, "s");
  log.model = model_from_json(field(j, "model"));
  log.seed = get_u64(j, "seed");
  log.force_prime = get_bool(j, "force_prime");
  const json& steps = field(j, "steps");
  if (!steps.is_array()) throw SchemaError("steps is not an array");
  unsigned prev = 0;
  bool first = true;
  for (const json& group : steps) {
    CampaignStep cs;
    cs.step_j = get_u32(group, "step_j");
    if (!first && cs.step_j <= prev) throw SchemaError("campaign steps not strictly increasing");
    first = false;
    prev = cs.step_j;
    const json& sigs = field(group, "signatures");
    if (!sigs.is_array() || sigs.empty()) throw SchemaError("empty signature group");
    for (const json& js : sigs) {
      FaultySignature sig;
      sig.s_hat = get_nat(js, "s_hat");
      sig.step_j = get_u32(js, "step_j");
      if (sig.step_j != cs.step_j) throw SchemaError("signature step does not match its group");
      if (js.contains("ground_truth")) {
        const json& g = js["ground_truth"];
        GroundTruth gt;
        gt.n_hat = get_nat(g, "n_hat");
        gt.word_index = get_u32(g, "word_index");
        gt.mask = get_u64(g, "mask");
        gt.a_register = get_nat(g, "a_register");
        gt.a_exceeds_nhat = get_bool(g, "a_exceeds_nhat");
        sig.ground_truth = std::move(gt);
      }
      cs.signatures.push_back(std::move(sig));
    }
    log.steps.push_back(std::move(cs));
  }
  return log;
}

json dict_to_json(const PrimeDictionary& dict, unsigned rounds, std::uint64_t seed) {
  json entries = json::array();
  for (const FaultCandidate& c : dict.entries)
    entries.push_back(json{{"n_hat", to_dec(c.n_hat)},
                           {"word_index", dec_u(c.word_index)},
                           {"mask", dec_u(c.mask)}});
  return json{{"N", to_dec(dict.source_modulus)},
              {"model", model_to_json(dict.model)},
              {"capacity_cap", dec_u(dict.capacity_cap)},
              {"truncated", dict.truncated},
              {"mr_rounds", dec_u(rounds)},
              {"seed", dec_u(seed)},
              {"entries", std::move(entries)}};
}

PrimeDictionary dict_from_json(const json& j) {
  PrimeDictionary dict;
  dict.source_modulus = get_nat(j, "N");
  dict.model = model_from_json(field(j, "model"));
  dict.capacity_cap = get_u64(j, "capacity_cap");
  dict.truncated = get_bool(j, "truncated");
  const json& entries = field(j, "entries");
  if (!entries.is_array()) throw SchemaError("entries is not an array");
  for (const json& je : entries) {
    FaultCandidate c;
    c.n_hat = get_nat(je, "n_hat");
    c.word_index = get_u32(je, "word_index");
    c.mask = get_u64(je, "mask");
    dict.entries.push_back(std::move(c));
  }
  return dict;
}

json attack_report_json(const AttackOutcome& outcome, const AttackParams& params) {
  json windows = json::array();
  for (const WindowStats& ws : outcome.windows)
    windows.push_back(json{{"step_j", dec_u(ws.step_j)},
                           {"candidates_tested", dec_u(ws.candidates_tested)},
                           {"entries_skipped", dec_u(ws.entries_skipped)},
                           {"roots_checked", dec_u(ws.roots_checked)},
                           {"qr_tests", dec_u(ws.qr_tests)},
                           {"prunes", dec_u(ws.prunes)},
                           {"overflows", dec_u(ws.overflows)},
                           {"successes", dec_u(ws.successes)},
                           {"accepted", ws.accepted},
                           {"signature_index", dec_u(ws.signature_index)},
                           {"seconds", ws.seconds}});
  json accepted = json::array();
  for (const AcceptedWindow& aw : outcome.state.accepted)
    accepted.push_back(json{{"step_j", dec_u(aw.step_j)},
                            {"n_hat", to_dec(aw.n_hat)},
                            {"window_value", dec_u(aw.window_value)}});
  json report{{"complete", outcome.complete},
              {"bits_known", dec_u(outcome.state.bits_known)},
              {"d_low", to_dec(outcome.state.d_low)},
              {"collisions", dec_u(outcome.state.collisions)},
              {"seconds", outcome.seconds},
              {"windows", std::move(windows)},
              {"accepted_windows", std::move(accepted)},
              {"params", json{{"window_l", dec_u(params.window_l)},
                              {"branch_cap", dec_u(params.branch_cap)},
                              {"mr_rounds", dec_u(params.mr_rounds)},
                              {"dict_size", dec_u(params.dict.entries.size())}}}};
  if (outcome.complete) {
    report["d"] = to_dec(outcome.d);
  } else {
    report["failed_step"] = dec_u(outcome.partial.failed_step);
    report["reason"] = outcome.partial.reason;
  }
  return report;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }
  if (read_json_file(path) != j)
    throw std::runtime_error("round-trip validation failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

namespace {

std::optional<std::filesystem::path> cache_file(const Nat& n, const FaultModel& model) {
  const char* dir = std::getenv("MODFAULT_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  char name[64];
  std::snprintf(name, sizeof name, "dict-%016llx-w%u.json",
                static_cast<unsigned long long>(fnv1a64(to_dec(n))), model.word_width);
  return std::filesystem::path(dir) / name;
}

}  // namespace

std::optional<PrimeDictionary> load_cached_dict(const Nat& n, const FaultModel& model,
                                                std::uint64_t cap, unsigned rounds,
                                                std::uint64_t seed) {
  const auto path = cache_file(n, model);
  if (!path || !std::filesystem::exists(*path)) return std::nullopt;
  json j;
  try {
    j = read_json_file(*path);
    PrimeDictionary dict = dict_from_json(j);
    if (dict.source_modulus != n || dict.model.word_width != model.word_width ||
        dict.model.n_bits != model.n_bits)
      return std::nullopt;
    if (dict.capacity_cap != cap || get_u32(j, "mr_rounds") != rounds ||
        get_u64(j, "seed") != seed)
      return std::nullopt;  // built under a different config; rebuild
    return dict;
  } catch (const SchemaError&) {
    return std::nullopt;  // stale or corrupt cache entry is just a miss
  }
}

void store_cached_dict(const PrimeDictionary& dict, unsigned rounds, std::uint64_t seed) {
  const auto path = cache_file(dict.source_modulus, dict.model);
  if (!path) return;
  std::filesystem::create_directories(path->parent_path());
  write_json_file(*path, dict_to_json(dict, rounds, seed));
}

}  // namespace modfault
