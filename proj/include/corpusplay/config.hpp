#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpusplay/corpus.hpp"
#include "corpusplay/policy.hpp"
#include "corpusplay/rewards.hpp"

namespace corpusplay {

struct CorpusConfig {
  std::string path;  // store file (id/text/source/token_estimate lines)
  std::map<std::string, double> source_mix;
};

struct EngineConfig {
  int B = 128;
  int G = 8;
  int N = 1024;
  int T = 640;
  std::uint64_t seed = 0;
  RewardConfig reward;
  TemplateFamily template_family = TemplateFamily::Qwen3;
  std::string template_set = "default";
  int concurrency = 32;
  double temperature_challenger = 1.0;
  double temperature_reasoner = 1.0;
  int max_tokens_challenger = 4096;
  int max_tokens_reasoner = 4096;
  std::size_t segment_budget = kDefaultSegmentBudget;
  CorpusConfig corpus;
  // {"kind": ..., shared fields..., "challenger": {...}, "reasoner": {...}};
  // each role's spec is the shared fields overlaid with its own object.
  nlohmann::json policy;

  EngineConfig();

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  static EngineConfig from_json(const nlohmann::json& j);

  // Policy spec for one role. Scripted kinds without a seed get one derived
  // from `seed` and the role.
  nlohmann::json role_policy(Role role) const;
};

// Every accepted key as a dotted path, in documentation order.
const std::vector<std::string>& config_keys();

// Parses a config file. Unknown keys and wrong types throw ConfigError; a
// relative corpus.path is resolved against the file's directory.
EngineConfig load_config(const std::filesystem::path& path);

// Applies "dotted.key=value" to a config JSON document. The value is parsed
// as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& config, std::string_view assignment);

// SHA-256 (hex) of the canonical config with T and concurrency left out,
// since neither changes the content of any iteration.
std::string config_hash(const EngineConfig& config);

std::string sha256_hex(std::string_view data);

struct Clients {
  std::shared_ptr<PolicyClient> challenger;
  std::shared_ptr<PolicyClient> reasoner;
};

Clients make_clients(const EngineConfig& config);

}  // namespace corpusplay
