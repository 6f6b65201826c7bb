#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "modfault/attack.hpp"
#include "modfault/fault_model.hpp"
#include "modfault/fault_sim.hpp"
#include "modfault/rsa.hpp"

namespace modfault {

// Every integer is carried as a decimal string so no JSON consumer ever
// rounds one; loaders throw SchemaError naming the offending field.

nlohmann::json key_to_json(const RsaKeyPair& key);
RsaKeyPair key_from_json(const nlohmann::json& j);

nlohmann::json campaign_to_json(const CampaignLog& log, bool redact = false);
CampaignLog campaign_from_json(const nlohmann::json& j);

nlohmann::json dict_to_json(const PrimeDictionary& dict, unsigned rounds, std::uint64_t seed);
PrimeDictionary dict_from_json(const nlohmann::json& j);

nlohmann::json attack_report_json(const AttackOutcome& outcome, const AttackParams& params);

// Writes pretty-printed JSON, re-reads the file and verifies it parses back
// to the same document before returning.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

// Dictionary cache under MODFAULT_CACHE_DIR, one file per (N, word_width);
// a hit requires the stored cap, rounds and seed to match exactly so cached
// and cold runs stay byte-identical.
std::optional<PrimeDictionary> load_cached_dict(const Nat& n, const FaultModel& model,
                                                std::uint64_t cap, unsigned rounds,
                                                std::uint64_t seed);
void store_cached_dict(const PrimeDictionary& dict, unsigned rounds, std::uint64_t seed);

}  // namespace modfault
